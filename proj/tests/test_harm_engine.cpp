#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"

using Catch::Matchers::WithinAbs;

namespace {
constexpr double kTol = 1e-12;

hq::Context tip_ctx(std::int64_t choice, std::int64_t wallet) {
  return {{"TipChoice", num(choice)}, {"Wallet", num(wallet)}};
}
}  // namespace

TEST_CASE("tipping: quantitative harm of stiffing on a thin wallet") {
  hq::ModelFile f = load_scenario("tipping");
  const hq::UtilityModel& waiter = f.sole_agent();
  hq::HarmAssessment h =
      hq::quantitative_harm(f.model, waiter, tip_ctx(1, 5), iv1("Tip", num(1)));
  CHECK_THAT(h.value, WithinAbs(0.04, kTol));
  // Three alternatives all reach the capped payout of 5; the cash constraint
  // stops anything better, so all maximize.
  REQUIRE(h.witnesses.size() == 3);
  CHECK(h.witnesses[0].alt == hq::Assignment{{"Tip", num(5)}});
  CHECK(h.witnesses[0].outcome == num(5));
  CHECK(h.witnesses[0].witness.held.empty());
  CHECK(h.witnesses[1].alt == hq::Assignment{{"Tip", num(20)}});
  CHECK(h.witnesses[1].outcome == num(5));
  CHECK(h.witnesses[2].alt == hq::Assignment{{"Tip", num(30)}});
  CHECK(h.witnesses[2].outcome == num(5));
}

TEST_CASE("tipping: a five on a thin wallet harms no one") {
  hq::ModelFile f = load_scenario("tipping");
  hq::HarmAssessment h =
      hq::quantitative_harm(f.model, f.sole_agent(), tip_ctx(5, 5), iv1("Tip", num(5)));
  CHECK(h.value == 0.0);
  // Stiffing was available and caused, so a qualifying pair exists at value 0.
  REQUIRE_FALSE(h.witnesses.empty());
  CHECK(h.witnesses[0].alt == hq::Assignment{{"Tip", num(1)}});
}

TEST_CASE("tipping: twenty on a fat wallet sits at the default") {
  hq::ModelFile f = load_scenario("tipping");
  hq::HarmAssessment h = hq::quantitative_harm(f.model, f.sole_agent(),
                                               tip_ctx(20, 30), iv1("Tip", num(20)));
  CHECK(h.value == 0.0);
}

TEST_CASE("treatments: the t1 death and its unique maximizer") {
  hq::ModelFile f = load_scenario("treatments");
  hq::HarmAssessment h = hq::quantitative_harm(
      f.model, f.sole_agent(), ctx3("no", "yes", "yes"), iv1("T", sym("t1")));
  CHECK_THAT(h.value, WithinAbs(1.0, kTol));
  REQUIRE(h.witnesses.size() == 1);
  CHECK(h.witnesses[0].alt == hq::Assignment{{"T", sym("t2")}});
  CHECK(h.witnesses[0].outcome == sym("alive"));
  CHECK(h.witnesses[0].witness.held.empty());
}

TEST_CASE("relative_harm agrees with the pair it names") {
  hq::ModelFile f = load_scenario("treatments");
  double r = hq::relative_harm(f.model, f.sole_agent(), ctx3("no", "yes", "yes"),
                               iv1("T", sym("t1")), {{"T", sym("t2")}}, sym("alive"));
  CHECK_THAT(r, WithinAbs(1.0, kTol));

  hq::ModelFile tip = load_scenario("tipping");
  double r2 = hq::relative_harm(tip.model, tip.sole_agent(), tip_ctx(1, 5),
                                iv1("Tip", num(1)), {{"Tip", num(5)}}, num(5));
  CHECK_THAT(r2, WithinAbs(0.04, kTol));
}

TEST_CASE("relative_harm names the failed precondition") {
  hq::ModelFile f = load_scenario("treatments");
  try {
    hq::relative_harm(f.model, f.sole_agent(), ctx3("no", "yes", "yes"),
                      iv1("T", sym("t1")), {{"T", sym("none")}}, sym("alive"));
    FAIL("expected a precondition error");
  } catch (const hq::PreconditionError& e) {
    CHECK(e.condition == "AC2");
  }
}

TEST_CASE("medication-surgery: per-context harm uses the cure as contrast") {
  hq::ModelFile f = load_scenario("medication-surgery");
  const hq::UtilityModel& patient = f.sole_agent();
  hq::Context bad{{"G", sym("bad")}};
  hq::Context ok{{"G", sym("ok")}};

  hq::HarmAssessment surgery_bad =
      hq::quantitative_harm(f.model, patient, bad, iv1("X", num(0)));
  CHECK_THAT(surgery_bad.value, WithinAbs(1.0, kTol));
  REQUIRE(surgery_bad.witnesses.size() == 1);
  CHECK(surgery_bad.witnesses[0].alt == hq::Assignment{{"X", num(1)}});
  CHECK(surgery_bad.witnesses[0].outcome == sym("cured"));
  CHECK(surgery_bad.witnesses[0].witness.held ==
        hq::Assignment{{"Operated", sym("true")}});

  hq::HarmAssessment med_bad =
      hq::quantitative_harm(f.model, patient, bad, iv1("X", num(1)));
  CHECK_THAT(med_bad.value, WithinAbs(0.5, kTol));
  REQUIRE(med_bad.witnesses.size() == 1);
  CHECK(med_bad.witnesses[0].alt == hq::Assignment{{"X", num(0)}});
  CHECK(med_bad.witnesses[0].outcome == sym("cured"));
  CHECK(med_bad.witnesses[0].witness.held ==
        hq::Assignment{{"SurgicalDeath", sym("false")}});

  CHECK(hq::quantitative_harm(f.model, patient, ok, iv1("X", num(0))).value == 0.0);
  CHECK_THAT(hq::quantitative_harm(f.model, patient, ok, iv1("X", num(1))).value,
             WithinAbs(0.5, kTol));
}

TEST_CASE("qualitative harm on the organ-donation model") {
  hq::ModelFile f = load_scenario("organ-donation");
  const hq::UtilityModel& billy = f.agent("billy");
  const hq::UtilityModel& p1 = f.agent("p1");
  hq::Context empty;

  hq::QualitativeVerdict harvested =
      hq::qualitative_harm(f.model, billy, empty, iv1("Harvest", sym("yes")));
  CHECK(harvested.harms);
  REQUIRE(harvested.certificate.has_value());
  CHECK(harvested.certificate->alt == hq::Assignment{{"Harvest", sym("no")}});
  CHECK(harvested.certificate->outcome == sym("alive"));

  CHECK_FALSE(
      hq::qualitative_harm(f.model, billy, empty, iv1("Harvest", sym("no"))).harms);
  CHECK_FALSE(
      hq::qualitative_harm(f.model, p1, empty, iv1("Harvest", sym("no"))).harms);
  CHECK_FALSE(
      hq::qualitative_harm(f.model, p1, empty, iv1("Harvest", sym("yes"))).harms);
}

TEST_CASE("h1_h2_only matches the spot checks") {
  hq::ModelFile f = load_scenario("tipping");
  CHECK(hq::h1_h2_only(f.model, f.sole_agent(), tip_ctx(1, 5), iv1("Tip", num(1))));
  CHECK_FALSE(
      hq::h1_h2_only(f.model, f.sole_agent(), tip_ctx(20, 30), iv1("Tip", num(20))));
}

TEST_CASE("tipping: benefit of a generous tip over the upper default") {
  hq::ModelFile f = load_scenario("tipping");
  hq::HarmAssessment b = hq::quantitative_benefit(f.model, f.sole_agent(),
                                                  tip_ctx(30, 30), iv1("Tip", num(30)));
  CHECK_THAT(b.value, WithinAbs(0.05, kTol));
  REQUIRE(b.witnesses.size() == 3);
  CHECK(b.witnesses[0].alt == hq::Assignment{{"Tip", num(1)}});
  CHECK(b.witnesses[0].outcome == num(1));

  // At or below the upper default there is nothing to credit.
  CHECK(hq::quantitative_benefit(f.model, f.sole_agent(), tip_ctx(20, 30),
                                 iv1("Tip", num(20)))
            .value == 0.0);
  CHECK(hq::quantitative_benefit(f.model, f.sole_agent(), tip_ctx(1, 5),
                                 iv1("Tip", num(1)))
            .value == 0.0);
}

TEST_CASE("rbt_harm compares against the named default action only") {
  hq::ModelFile f = load_scenario("treatments");
  const hq::UtilityModel& patient = f.sole_agent();
  hq::Intervention none = iv1("T", sym("none"));
  for (const auto& ctx : hq::enumerate_contexts(f.model))
    CHECK(hq::rbt_harm(f.model, patient, ctx, iv1("T", sym("t1")), none) == 0.0);

  CHECK_THAT(
      hq::rbt_harm(f.model, patient, ctx3("yes", "no", "no"), iv1("T", sym("t2")), none),
      WithinAbs(1.0, kTol));
  CHECK(hq::rbt_harm(f.model, patient, ctx3("yes", "no", "yes"), iv1("T", sym("t2")),
                     none) == 0.0);
  CHECK(hq::rbt_harm(f.model, patient, ctx3("no", "yes", "yes"), none, none) == 0.0);
}

TEST_CASE("utility model validation") {
  hq::ModelFile f = load_scenario("treatments");
  hq::UtilityModel um = f.sole_agent();
  um.outcome = "missing";
  CHECK_THROWS_AS(
      hq::quantitative_harm(f.model, um, ctx3("no", "yes", "yes"), iv1("T", sym("t1"))),
      hq::StructuralError);
  um = f.sole_agent();
  um.values.erase(sym("dead"));
  CHECK_THROWS_AS(
      hq::quantitative_harm(f.model, um, ctx3("no", "yes", "yes"), iv1("T", sym("t1"))),
      hq::StructuralError);
}

TEST_CASE("affine rescaling scales harm and keeps witnesses") {
  hq::ModelFile f = load_scenario("tipping");
  hq::UtilityModel scaled = hq::affine_transform(f.sole_agent(), 3.0, -2.0);
  hq::HarmAssessment base =
      hq::quantitative_harm(f.model, f.sole_agent(), tip_ctx(1, 5), iv1("Tip", num(1)));
  hq::HarmAssessment moved =
      hq::quantitative_harm(f.model, scaled, tip_ctx(1, 5), iv1("Tip", num(1)));
  CHECK_THAT(moved.value, WithinAbs(3.0 * base.value, 1e-9));
  CHECK(same_witnesses(base.witnesses, moved.witnesses));
}

TEST_CASE("property: harm is nonnegative, gated, and bounded") {
  std::mt19937_64 rng(271828);
  for (int it = 0; it < 300; ++it) {
    RandomModel rm = random_model(rng, {.max_endogenous = 4, .max_range = 3});
    if (rm.endo.size() < 2) continue;
    const std::string& xv = rm.endo[0];
    const std::string& ov = rm.endo.back();
    hq::UtilityModel um;
    um.agent = "a";
    um.outcome = ov;
    std::uniform_real_distribution<double> uu(0.0, 1.0);
    double lo = 1e9, hi = -1e9;
    for (const auto& v : rm.model.variable(ov).range) {
      double val = uu(rng);
      um.values[v] = val;
      lo = std::min(lo, val);
      hi = std::max(hi, val);
    }
    um.default_low = um.default_high = uu(rng);
    const auto& xr = rm.model.variable(xv).range;
    std::uniform_int_distribution<int> px(0, int(xr.size()) - 1);
    hq::Intervention iv = iv1(xv, xr[px(rng)]);
    hq::Context ctx = random_context(rng, rm.model);

    hq::HarmAssessment h = hq::quantitative_harm(rm.model, um, ctx, iv);
    CHECK(h.value >= 0.0);
    CHECK(h.value <= std::max(0.0, std::min(um.default_low, hi) - lo) + 1e-15);
    hq::Value o = hq::solve(hq::intervene(rm.model, iv), ctx).at(ov);
    if (um.values.at(o) >= um.default_low) CHECK(h.value == 0.0);
  }
}

TEST_CASE("property: harm search agrees with the brute-force oracle") {
  std::mt19937_64 rng(161803);
  for (int it = 0; it < 300; ++it) {
    RandomModel rm = random_model(rng, {.max_endogenous = 4, .max_range = 3});
    if (rm.endo.size() < 2) continue;
    const std::string& xv = rm.endo[0];
    const std::string& ov = rm.endo.back();
    hq::UtilityModel um;
    um.agent = "a";
    um.outcome = ov;
    std::uniform_real_distribution<double> uu(0.0, 1.0);
    for (const auto& v : rm.model.variable(ov).range) um.values[v] = uu(rng);
    um.default_low = um.default_high = uu(rng);
    const auto& xr = rm.model.variable(xv).range;
    std::uniform_int_distribution<int> px(0, int(xr.size()) - 1);
    hq::Intervention iv = iv1(xv, xr[px(rng)]);
    hq::Context ctx = random_context(rng, rm.model);

    hq::HarmAssessment fast = hq::quantitative_harm(rm.model, um, ctx, iv);
    hq::HarmAssessment slow = harm_oracle(rm.model, um, ctx, iv);
    CHECK(fast.value == slow.value);
    CHECK(same_witnesses(fast.witnesses, slow.witnesses));
  }
}

TEST_CASE("property: positive harm iff both qualitative conditions") {
  std::mt19937_64 rng(141421);
  for (int it = 0; it < 300; ++it) {
    RandomModel rm = random_model(rng, {.max_endogenous = 4, .max_range = 2});
    if (rm.endo.size() < 2) continue;
    const std::string& xv = rm.endo[0];
    const std::string& ov = rm.endo.back();
    hq::UtilityModel um;
    um.agent = "a";
    um.outcome = ov;
    std::uniform_real_distribution<double> uu(0.0, 1.0);
    for (const auto& v : rm.model.variable(ov).range) um.values[v] = uu(rng);
    um.default_low = um.default_high = uu(rng);
    const auto& xr = rm.model.variable(xv).range;
    std::uniform_int_distribution<int> px(0, int(xr.size()) - 1);
    hq::Intervention iv = iv1(xv, xr[px(rng)]);
    hq::Context ctx = random_context(rng, rm.model);

    bool positive = hq::quantitative_harm(rm.model, um, ctx, iv).value > 0.0;
    CHECK(positive == hq::h1_h2_only(rm.model, um, ctx, iv));
  }
}
