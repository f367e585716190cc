#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>

#include "doctest.h"
#include "mnn/error.hpp"
#include "mnn/estimation.hpp"
#include "mnn/synthetic.hpp"
#include "test_support.hpp"

using namespace mnn;
using namespace mnn::testing;

namespace {

BasisSet constant(std::vector<double> knots) { return BasisSet(KnotGrid(std::move(knots)), BasisKind::PiecewiseConstant); }
BasisSet linear(std::vector<double> knots) { return BasisSet(KnotGrid(std::move(knots)), BasisKind::PiecewiseLinear); }

ErrorKind kind_thrown(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::Io;
}

// omega = exp(x) through a linear network with unit weight.
PhModel exp_x_model() {
  PhModel m{zero_core({constant({0, 100})}), {}};
  m.core.net.weight(0)[0] = 1.0;
  return m;
}

// Textbook product-limit survival with ties grouped, evaluated at t.
double product_limit(const Dataset& data, double t) {
  std::map<double, std::pair<int, int>> at;  // time -> (events, removed)
  for (const auto& r : data) {
    auto& e = at[r.time];
    e.first += r.event ? 1 : 0;
    e.second += 1;
  }
  double s = 1.0;
  auto risk = static_cast<double>(data.size());
  for (const auto& [time, counts] : at) {
    if (time > t) break;
    s *= 1.0 - counts.first / risk;
    risk -= counts.second;
  }
  return s;
}

Dataset make_data(std::mt19937_64& rng, std::size_t n, int event_types, bool ties) {
  Dataset d;
  std::uniform_real_distribution<double> u(0.1, 9.0);
  std::bernoulli_distribution event(0.7);
  std::uniform_int_distribution<int> type(0, event_types - 1);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    SurvivalRecord r;
    r.x.numeric = {normal(rng), normal(rng)};
    r.time = ties ? std::round(u(rng)) : u(rng);
    r.event = event(rng);
    r.event_type = type(rng);
    d.push_back(r);
  }
  return d;
}

MnnCore random_core(std::mt19937_64& rng, int event_types, BasisKind kind, std::vector<double> knots, int hidden) {
  std::vector<BasisSet> bases;
  for (int j = 0; j < event_types; ++j) bases.emplace_back(KnotGrid(knots), kind);
  NetworkSpec s;
  s.numeric_input_count = 2;
  s.hidden_widths.clear();
  if (hidden > 0) s.hidden_widths = {hidden};
  s.output_count = 0;
  for (const auto& b : bases) s.output_count += static_cast<int>(b.size());
  auto net = init_params(s, rng());
  randomize(net, rng, 0.5);
  return MnnCore{std::move(net), std::move(bases), PositivityMap{}};
}

}  // namespace

// --- Cox partial likelihood --------------------------------------------------------

TEST_CASE("Cox partial likelihood examples") {
  PhModel m{zero_core({constant({0, 10})}), {}};
  const Dataset two{record(0, 1.0, true), record(0, 2.0, true)};
  CHECK(cox_partial_loglik(m, two) == doctest::Approx(-std::log(2.0) / 2.0).epsilon(1e-14));
  CHECK(cox_partial_loglik(m, two) == doctest::Approx(-0.34657).epsilon(1e-5));

  const Dataset censored{record(0, 1.0, false), record(0, 2.0, false)};
  CHECK(kind_thrown([&] { cox_partial_loglik(m, censored); }) == ErrorKind::Estimation);

  const Dataset alone{record(0, 3.0, true)};
  CHECK(cox_partial_loglik(m, alone) == 0.0);
}

TEST_CASE("tied events share a risk set") {
  PhModel m{zero_core({constant({0, 10})}), {}};
  const Dataset d{record(0, 1.0, true), record(0, 1.0, true), record(0, 2.0, false)};
  CHECK(cox_partial_loglik(m, d) == doctest::Approx(-std::log(3.0)).epsilon(1e-14));
}

TEST_CASE("Cox likelihood with covariates matches a direct sum") {
  auto m = exp_x_model();
  const Dataset d{record(0.5, 1.0, true), record(-0.2, 2.0, false), record(1.0, 3.0, true), record(0.1, 4.0, true)};
  const double e1 = 0.5 - std::log(std::exp(0.5) + std::exp(-0.2) + std::exp(1.0) + std::exp(0.1));
  const double e2 = 1.0 - std::log(std::exp(1.0) + std::exp(0.1));
  const double e3 = 0.0;
  CHECK(cox_partial_loglik(m, d) == doctest::Approx((e1 + e2 + e3) / 3.0).epsilon(1e-14));
}

TEST_CASE("shifting every output leaves the single-basis partial likelihood unchanged") {
  std::mt19937_64 rng(3);
  auto core = random_core(rng, 2, BasisKind::PiecewiseConstant, {0, 10}, 3);
  PhModel m{core, {}};
  const auto d = make_data(rng, 40, 2, true);
  const double before = cox_partial_loglik(m, d);
  for (auto& b : m.core.net.bias(m.core.net.layout.layers.size() - 1)) b += 0.8;
  CHECK(std::abs(cox_partial_loglik(m, d) - before) < 1e-10);
}

TEST_CASE("mini-batch objective with full batches equals the full objective") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    const bool ties = trial % 2 == 0;
    const auto d = make_data(rng, 50 + static_cast<std::size_t>(trial) * 15, 2, ties);
    PhModel m{random_core(rng, 2, BasisKind::PiecewiseLinear, {0, 2, 5, 9}, 3), {}};
    const CoxRiskIndex index(d);
    std::vector<std::size_t> all(d.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    const std::vector<std::size_t> events(index.uncensored().begin(), index.uncensored().end());
    Rng r(1);
    const auto mb = cox_minibatch_objective(m, d, index, all, events, Mode::Eval, r);
    const auto full = cox_partial_loglik_with_gradient(m, d);
    CHECK(std::abs(mb.value - full.value) < 1e-10);
    CHECK(full.value == doctest::Approx(cox_partial_loglik(m, d)).epsilon(1e-13));
    CHECK(mb.skipped_terms == 0);
    double worst = 0.0;
    for (std::size_t i = 0; i < mb.grad.values.size(); ++i) {
      worst = std::max(worst, std::abs(mb.grad.values[i] - full.grad.values[i]));
    }
    CHECK(worst < 1e-10);
  }
}

TEST_CASE("equal hazard ratios give a zero head-bias gradient") {
  PhModel m{zero_core({linear({0, 5, 10})}, 2), {}};
  std::mt19937_64 rng(5);
  const auto d = make_data(rng, 30, 1, false);
  const CoxRiskIndex index(d);
  std::vector<std::size_t> general{0, 3, 5, 7, 11, 13, 17, 19, 23, 29};
  const std::vector<std::size_t> events(index.uncensored().begin(), index.uncensored().end());
  Rng r(0);
  const auto v = cox_minibatch_objective(m, d, index, general, events, Mode::Eval, r);
  const auto& head = m.core.net.layout.layers.back();
  for (std::size_t k = 0; k < head.rows; ++k) CHECK(std::abs(v.grad.values[head.bias_offset + k]) < 1e-14);
  // Every average is 1, so each term is -log of the full risk-set size.
  double expected = 0.0;
  std::size_t terms = 0;
  for (std::size_t n : events) {
    bool any = false;
    for (std::size_t g : general) any = any || d[g].time >= d[n].time;
    if (!any) continue;
    expected -= std::log(static_cast<double>(index.risk_set_size(d[n].time)));
    ++terms;
  }
  CHECK(v.terms == terms);
  CHECK(v.terms + v.skipped_terms == events.size());
  CHECK(v.value == doctest::Approx(expected / static_cast<double>(terms)).epsilon(1e-13));
}

TEST_CASE("subjects with no general-batch member at risk are skipped") {
  PhModel m{zero_core({constant({0, 10})}), {}};
  const Dataset d{record(0, 1.0, true), record(0, 2.0, false), record(0, 5.0, true), record(0, 6.0, false)};
  const CoxRiskIndex index(d);
  const std::vector<std::size_t> general{0, 1};
  const std::vector<std::size_t> events{0, 2};
  Rng r(0);
  const auto v = cox_minibatch_objective(m, d, index, general, events, Mode::Eval, r);
  CHECK(v.terms == 1);
  CHECK(v.skipped_terms == 1);
  CHECK(v.value == doctest::Approx(-std::log(4.0)).epsilon(1e-14));
}

TEST_CASE("Cox gradient matches finite differences on tiny datasets") {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const auto d = make_data(rng, 3 + static_cast<std::size_t>(trial) % 6, 1 + trial % 2, trial % 3 == 0);
    if (count_events(d) == 0) continue;
    const auto kind = trial % 2 ? BasisKind::PiecewiseLinear : BasisKind::PiecewiseConstant;
    PhModel m{random_core(rng, 1 + trial % 2, kind, {0, 3, 6, 9}, trial % 4), {}};
    const auto analytic = cox_partial_loglik_with_gradient(m, d).grad.values;
    const auto numeric = finite_difference(m.core.net, [&] { return cox_partial_loglik(m, d); });
    CHECK(max_relative_error(analytic, numeric) < 1e-4);
  }
}

// --- full likelihood -------------------------------------------------------------------

TEST_CASE("full likelihood examples") {
  const MnnModel dh = DhModel{zero_core({linear({0, 2, 4, 10})})};
  CHECK(full_loglik(dh, {record(0, 2.0, false)}) == doctest::Approx(-2.0).epsilon(1e-14));
  CHECK(full_loglik(dh, {record(0, 1.0, true)}) == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(kind_thrown([&] { full_loglik(dh, {}); }) == ErrorKind::Estimation);

  const MnnModel qr = QrModel{zero_core({linear({0, 0.5, 1, 2})})};
  CHECK(full_loglik(qr, {record(0, 2.0, false)}) == doctest::Approx(-2.0).epsilon(1e-14));
  CHECK(full_loglik(qr, {record(0, 1.0, true)}) == doctest::Approx(-1.0).epsilon(1e-14));

  const MnnModel ph = PhModel{zero_core({linear({0, 2})}), {}};
  CHECK(kind_thrown([&] { full_loglik(ph, {record(0, 1.0, true)}); }) == ErrorKind::Usage);
}

TEST_CASE("a zero hazard at an observed event is an estimation error") {
  DhModel m{zero_core({constant({0, 2, 4})})};
  m.core.h.kind = PositivityKind::Softplus;
  m.core.net.bias(0)[1] = -1e4;  // softplus underflows to exactly zero
  CHECK(kind_thrown([&] { full_loglik(MnnModel(m), {record(0, 3.0, true)}); }) == ErrorKind::Estimation);
  CHECK(std::isfinite(full_loglik(MnnModel(m), {record(0, 1.0, true)})));

  // The exp map clamps its input, so its hazards stay positive.
  m.core.h.kind = PositivityKind::Exp;
  CHECK(std::isfinite(full_loglik(MnnModel(m), {record(0, 3.0, true)})));
}

TEST_CASE("full likelihood gradients match finite differences") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const auto d = make_data(rng, 2 + static_cast<std::size_t>(trial) % 7, 1 + trial % 2, false);
    const auto kind = trial % 2 ? BasisKind::PiecewiseLinear : BasisKind::PiecewiseConstant;
    MnnModel model = trial % 3 == 0
                         ? MnnModel(QrModel{random_core(rng, 1 + trial % 2, kind, {0, 0.5, 1.0, 2.0}, trial % 4)})
                         : MnnModel(DhModel{random_core(rng, 1 + trial % 2, kind, {0, 2, 5, 9}, trial % 4)});
    const auto analytic = full_loglik_with_gradient(model, d).grad.values;
    const auto numeric = finite_difference(core_of(model).net, [&] { return full_loglik(model, d); });
    CHECK(max_relative_error(analytic, numeric) < 1e-4);
    CHECK(full_loglik_with_gradient(model, d).value == doctest::Approx(full_loglik(model, d)).epsilon(1e-14));
  }
}

// --- baselines -----------------------------------------------------------------------

TEST_CASE("Kalbfleisch-Prentice baseline hand example") {
  PhModel m{zero_core({constant({0, 10})}), {}};
  const Dataset d{record(0, 1.0, true), record(0, 2.0, false), record(0, 3.0, true)};
  const auto b = kalbfleisch_prentice_baseline(m, d);
  REQUIRE(b.size() == 1);
  REQUIRE(b[0].times().size() == 2);
  CHECK(b[0].times()[0] == 1.0);
  CHECK(b[0].jumps()[0] == doctest::Approx(-std::log(2.0 / 3.0)).epsilon(1e-15));
  CHECK(b[0].jumps()[0] == doctest::Approx(0.405465).epsilon(1e-6));
  CHECK(b[0].times()[1] == 3.0);
  CHECK(std::isinf(b[0].jumps()[1]));
}

TEST_CASE("baseline single-event jumps follow the closed form") {
  auto m = exp_x_model();
  const Dataset d{record(0.3, 1.0, true), record(-0.4, 2.0, false), record(0.9, 3.0, true), record(0.0, 4.0, false)};
  const auto b = kalbfleisch_prentice_baseline(m, d);
  const double w0 = std::exp(0.3);
  const double risk0 = w0 + std::exp(-0.4) + std::exp(0.9) + 1.0;
  const double w2 = std::exp(0.9);
  const double risk2 = w2 + 1.0;
  CHECK(b[0].jumps()[0] == doctest::Approx(-std::log1p(-w0 / risk0) / w0).epsilon(1e-14));
  CHECK(b[0].jumps()[1] == doctest::Approx(-std::log1p(-w2 / risk2) / w2).epsilon(1e-14));
}

TEST_CASE("with unit hazard ratios the baseline reproduces the product-limit survival") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const auto d = make_data(rng, 5 + static_cast<std::size_t>(trial) * 7, 1, trial % 2 == 0);
    PhModel m{zero_core({linear({0, 3, 9})}, 2), {}};
    m.baseline = kalbfleisch_prentice_baseline(m, d);
    const auto km = kaplan_meier(d);
    const Covariates x{{0.0, 0.0}, {}, {}};
    for (double t = 0.0; t < 10.0; t += 0.05) {
      const double s = std::exp(-ph_cumulative_hazard(m, x, t)[0]);
      CHECK(std::abs(s - product_limit(d, t)) < 1e-12);
      CHECK(std::abs(s - km(t)) < 1e-12);
    }
  }
}

TEST_CASE("no events of a type give an empty baseline") {
  PhModel m{zero_core({constant({0, 10}), constant({0, 10})}), {}};
  const Dataset d{record(0, 1.0, true, 0), record(0, 2.0, false, 0)};
  const auto b = kalbfleisch_prentice_baseline(m, d);
  CHECK(b[1].times().empty());
  m.baseline = b;
  CHECK(ph_cumulative_hazard(m, Covariates{{0.0}, {}, {}}, 5.0)[1] == 0.0);
}

TEST_CASE("tied events with unequal hazard ratios solve the joint equation") {
  auto m = exp_x_model();
  const Dataset d{record(0.2, 1.0, true), record(-0.5, 1.0, true), record(0.4, 2.0, true), record(1.0, 3.0, false)};
  const auto b = kalbfleisch_prentice_baseline(m, d);
  const double beta = b[0].jumps()[0];
  double risk = 0.0;
  for (const auto& r : d) risk += std::exp(r.x.numeric[0]);
  double lhs = 0.0;
  for (double x : {0.2, -0.5}) {
    const double w = std::exp(x);
    lhs += w / -std::expm1(-beta * w);
  }
  CHECK(lhs == doctest::Approx(risk).epsilon(1e-10));
}

// --- Kaplan-Meier ------------------------------------------------------------------

TEST_CASE("Kaplan-Meier examples") {
  const Dataset d{record(0, 1.0, true), record(0, 2.0, false), record(0, 3.0, true)};
  const auto s = kaplan_meier(d);
  CHECK(s(0.5) == 1.0);
  CHECK(s(1.0) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(s(2.5) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(s(3.0) == 0.0);

  const auto none = kaplan_meier({record(0, 1.0, false), record(0, 4.0, false)});
  for (double t : {0.0, 1.0, 5.0}) CHECK(none(t) == 1.0);

  const auto one = kaplan_meier({record(0, 2.0, true)});
  CHECK(one(1.9) == 1.0);
  CHECK(one(2.0) == 0.0);
  CHECK(one(8.0) == 0.0);
  CHECK_THROWS_AS(kaplan_meier({}), Error);
}

TEST_CASE("Kaplan-Meier with an event-type filter censors the other types") {
  const Dataset d{record(0, 1.0, true, 0), record(0, 2.0, true, 1), record(0, 3.0, true, 0)};
  const auto s = kaplan_meier(d, 0);
  CHECK(s(1.0) == doctest::Approx(2.0 / 3.0));
  CHECK(s(2.5) == doctest::Approx(2.0 / 3.0));
  CHECK(s(3.0) == 0.0);
}

TEST_CASE("a lone terminal event sends both estimates to zero") {
  std::mt19937_64 rng(9);
  auto d = make_data(rng, 25, 1, false);
  std::sort(d.begin(), d.end(), [](const auto& a, const auto& b) { return a.time < b.time; });
  d.back().event = true;
  PhModel m{zero_core({constant({0, 10})}, 2), {}};
  m.baseline = kalbfleisch_prentice_baseline(m, d);
  const double last = d.back().time;
  CHECK(survival(MnnModel(m), d.back().x, last) == 0.0);
  CHECK(kaplan_meier(d)(last) == 0.0);
}

// --- optimization and training ---------------------------------------------------------

TEST_CASE("Adam ascends a concave quadratic and clips large gradients") {
  TrainConfig c;
  c.step_size = 0.05;
  AdamOptimizer opt(2, c);
  std::vector<double> p{3.0, -2.0};
  for (int i = 0; i < 2000; ++i) {
    const std::vector<double> g{-(p[0] - 1.0), -(p[1] + 0.5)};
    opt.step(p, g);
  }
  CHECK(p[0] == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(p[1] == doctest::Approx(-0.5).epsilon(1e-3));
  CHECK(opt.iteration() == 2000);

  AdamOptimizer first(1, TrainConfig{});
  std::vector<double> q{0.0};
  first.step(q, std::vector<double>{1e9});
  // The first Adam step has magnitude step_size whatever the gradient scale.
  CHECK(q[0] == doctest::Approx(1e-3).epsilon(1e-6));
}

TEST_CASE("train config validation") {
  TrainConfig c;
  c.batch_size = 0;
  CHECK(kind_thrown([&] { c.validate(); }) == ErrorKind::Config);
  c = TrainConfig{};
  c.step_size = 0.0;
  CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("batch sampler draws without replacement within a pass") {
  std::vector<std::size_t> unc{1, 4, 6};
  BatchSampler s(10, unc, 4, 5);
  Rng rng(3);
  std::vector<std::size_t> seen;
  for (int i = 0; i < 5; ++i) {
    const auto b = s.next_general(rng);
    CHECK(b.size() == 4);
    seen.insert(seen.end(), b.begin(), b.end());
  }
  // Two full passes fit in the first 20 draws.
  std::vector<int> counts(10, 0);
  for (std::size_t v : seen) ++counts[v];
  for (int c : counts) CHECK(c == 2);
  // A batch larger than its pool is the whole pool.
  CHECK(s.next_events(rng) == unc);
}

TEST_CASE("zero iterations return the initial network with a baseline") {
  std::mt19937_64 rng(10);
  const auto d = make_data(rng, 30, 2, false);
  ModelConfig mc;
  mc.kind = ModelKind::Ph;
  mc.spec.numeric_input_count = 2;
  mc.spec.hidden_widths = {4};
  mc.bases = {linear({0, 5, 10}), linear({0, 5, 10})};
  TrainConfig tc;
  tc.iterations = 0;
  tc.seed = 77;
  const auto r = train(mc, d, tc);
  CHECK(r.trace.empty());
  const auto& ph = std::get<PhModel>(r.model);
  CHECK(ph.core.net.values == core_of(make_model(mc, 77)).net.values);
  CHECK(ph.baseline.size() == 2);
  CHECK(ph.baseline == kalbfleisch_prentice_baseline(ph, d));
}

TEST_CASE("training is deterministic given the seed") {
  synthetic::SyntheticSpec spec;
  spec.n = 300;
  spec.seed = 4;
  const auto d = synthetic::sample_dataset(spec);
  for (ModelKind kind : {ModelKind::Ph, ModelKind::Qr, ModelKind::Dh}) {
    ModelConfig mc;
    mc.kind = kind;
    mc.spec.numeric_input_count = 2;
    mc.spec.hidden_widths = {5};
    const auto knots = kind == ModelKind::Qr ? std::vector<double>{0, 0.01, 0.03, 0.06, 0.1, 0.2} : uniform_knots(0, 10, 2);
    mc.bases = {linear(knots), linear(knots)};
    TrainConfig tc;
    tc.iterations = 30;
    tc.batch_size = 64;
    tc.event_batch_size = 16;
    tc.seed = 9;
    const auto a = train(mc, d, tc);
    const auto b = train(mc, d, tc);
    CHECK(core_of(a.model).net.values == core_of(b.model).net.values);
    CHECK(a.trace == b.trace);
    tc.seed = 10;
    CHECK(core_of(train(mc, d, tc).model).net.values != core_of(a.model).net.values);
  }
}

TEST_CASE("DH with one constant basis recovers an exponential rate") {
  const double rate = 2.0;
  Rng rng(123);
  std::exponential_distribution<double> expo(rate);
  Dataset d;
  double total = 0.0;
  for (int i = 0; i < 10000; ++i) {
    d.push_back(record(0.0, expo(rng), true));
    total += d.back().time;
  }
  ModelConfig mc;
  mc.kind = ModelKind::Dh;
  mc.spec.numeric_input_count = 1;
  mc.spec.hidden_widths.clear();
  mc.bases = {constant({0, 100})};
  TrainConfig tc;
  tc.iterations = 3000;
  tc.step_size = 5e-3;
  const auto r = train(mc, d, tc);
  const double fitted = dh_hazard(std::get<DhModel>(r.model), Covariates{{0.0}, {}, {}}, 1.0)[0];
  const double mle = static_cast<double>(d.size()) / total;
  CHECK(std::abs(fitted - mle) < 0.05 * mle);
}

TEST_CASE("the smoothed PH loss trace rises over the first half of training") {
  synthetic::SyntheticSpec spec;
  spec.n = 2000;
  spec.seed = 21;
  const auto d = synthetic::sample_dataset(spec);
  ModelConfig mc;
  mc.kind = ModelKind::Ph;
  mc.spec.numeric_input_count = 2;
  mc.bases = {linear(uniform_knots(0, 10, 2)), linear(uniform_knots(0, 10, 2))};
  TrainConfig tc;
  tc.iterations = 1000;
  tc.seed = 1;
  const auto r = train(mc, d, tc);
  // Means of consecutive 100-iteration windows.
  std::vector<double> windows;
  for (std::size_t start = 0; start + 100 <= r.trace.size() / 2; start += 100) {
    double s = 0.0;
    for (std::size_t i = start; i < start + 100; ++i) s += r.trace[i];
    windows.push_back(s / 100.0);
  }
  REQUIRE(windows.size() == 5);
  for (std::size_t i = 1; i < windows.size(); ++i) CHECK(windows[i] >= windows[i - 1]);
}

TEST_CASE("a non-finite objective aborts training with the trace") {
  ModelConfig mc;
  mc.kind = ModelKind::Dh;
  mc.spec.numeric_input_count = 1;
  mc.spec.hidden_widths.clear();
  mc.bases = {constant({0, 1})};
  Dataset d{record(std::numeric_limits<double>::max(), 1.0, true)};
  TrainConfig tc;
  tc.iterations = 5;
  try {
    train(mc, d, tc);
  } catch (const TrainingDiverged&) {
    CHECK(true);
  } catch (const Error& e) {
    // Inputs are validated before they can overflow the objective.
    CHECK(e.kind() == ErrorKind::Data);
  }
}
