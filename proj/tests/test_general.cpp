#include "test_support.hpp"

#include <gtest/gtest.h>

using namespace persuasion;
using namespace persuasion::general;
namespace ts = testing_support;

namespace {

std::vector<std::vector<double>> eum_table(const PersuasionInstance& inst) {
  const auto& p = std::get<ExpectedParams>(inst.receiver.params());
  return p.u.rows();
}

}  // namespace

TEST(Grid, SizesAndDefaults) {
  EXPECT_EQ(grid_size(12, 4), 455u);
  EXPECT_EQ(grid_size(24, 1), 1u);
  EXPECT_EQ(default_grid(4).k, 24u);
  EXPECT_EQ(default_grid(6).k, 8u);
  EXPECT_LE(grid_size(default_grid(30).k, 30), kMaxGridCandidates);
  std::size_t count = 0;
  for_each_grid_belief(3, 5, [&](std::span<const double> mu) {
    double s = 0.0;
    for (double x : mu) s += x;
    EXPECT_NEAR(s, 1.0, 1e-12);
    ++count;
  });
  EXPECT_EQ(count, grid_size(5, 3));
  EXPECT_THROW(for_each_grid_belief(40, 40, [](std::span<const double>) {}), std::invalid_argument);
}

TEST(Grid, VerticesForExampleOne) {
  const auto inst = ts::example1();
  const auto pts = grid_vertices(inst, 1, {12});
  auto has = [&](std::vector<double> p) {
    for (const auto& q : pts.points) {
      double d = 0.0;
      for (std::size_t i = 0; i < 4; ++i) d = std::max(d, std::abs(q[i] - p[i]));
      if (d < 1e-12) return true;
    }
    return false;
  };
  EXPECT_TRUE(has({9.0 / 12, 0, 0, 3.0 / 12}));
  EXPECT_TRUE(has({8.0 / 12, 0, 0, 4.0 / 12}));
  EXPECT_FALSE(has({7.0 / 12, 0, 0, 5.0 / 12}));
}

TEST(Grid, DominantActionGetsWholeGridAndOthersNothing) {
  const PersuasionInstance inst(StateSpace::numbered(3), ActionSpace({"a", "b"}), Belief::uniform(3),
                                SenderUtility::from_rows({{0, 1}, {0, 1}, {0, 1}}),
                                make_expected({{1, 0}, {1, 0}, {1, 0}}));
  EXPECT_EQ(grid_vertices(inst, 0, {6}).size(), grid_size(6, 3));
  EXPECT_TRUE(grid_vertices(inst, 1, {6}).empty());
  EXPECT_NEAR(solve_general(inst, GridSpec{6}).value, 0.0, 1e-12);
}

TEST(Grid, ExtraPointsAppended) {
  PointSet extra;
  extra.add({0.5, 0.5}, "mid");
  const PersuasionInstance inst(StateSpace::numbered(2), ActionSpace({"a"}), Belief::uniform(2),
                                SenderUtility::from_rows({{1}, {2}}), make_expected({{0}, {0}}));
  const auto pts = grid_vertices(inst, 0, {1}, extra);
  EXPECT_EQ(pts.size(), 3u);
  EXPECT_EQ(pts.label(2), "mid");
}

TEST(SolveGeneral, ExampleOne) {
  const auto inst = ts::example1();
  EXPECT_NEAR(solve_general(inst, GridSpec{12}).value, 1.0, 1e-9);
  EXPECT_NEAR(concavify_oracle(inst, {12}), 1.0, 1e-9);
  EXPECT_TRUE(full_persuasion_general(inst, GridSpec{12}));
}

TEST(SolveGeneral, SingleAction) {
  const PersuasionInstance inst(StateSpace::numbered(3), ActionSpace({"only"}), Belief({0.2, 0.3, 0.5}),
                                SenderUtility::from_rows({{1}, {2}, {4}}), make_expected({{0}, {0}, {0}}));
  for (std::size_t k : {1, 3, 7}) EXPECT_NEAR(solve_general(inst, GridSpec{k}).value, 0.2 + 0.6 + 2.0, 1e-10);
}

TEST(SolveGeneral, InfeasibleCoverReported) {
  const auto inst = ts::example1();
  std::vector<PointSet> sets(2);
  sets[1].add({1, 0, 0, 0});
  EXPECT_THROW(solve_general(inst, sets), InfeasibleCover);
}

TEST(SolveGeneral, OracleEquivalence) {
  std::mt19937_64 rng(314);
  for (int t = 0; t < 40; ++t) {
    const std::size_t n = 2 + t % 3, m = 2 + t % 2;
    const bool eum = t % 2 == 0;
    const auto inst = eum ? ts::random_eum_instance(rng, n, m) : ts::random_mean_stdev_instance(rng, n, m);
    const double v = solve_general(inst, GridSpec{12}).value;
    EXPECT_NEAR(v, concavify_oracle(inst, {12}), 1e-7) << "instance " << t;
    if (eum) EXPECT_NEAR(v, ts::recommendation_oracle(inst, eum_table(inst)), 1e-7) << "instance " << t;
  }
}

TEST(SolveGeneral, GridRefinementMonotone) {
  std::mt19937_64 rng(315);
  for (int t = 0; t < 15; ++t) {
    const auto inst = ts::random_mean_stdev_instance(rng, 3, 2 + t % 2);
    const double v4 = solve_general(inst, GridSpec{4}).value;
    const double v8 = solve_general(inst, GridSpec{8}).value;
    const double v24 = solve_general(inst, GridSpec{24}).value;
    EXPECT_LE(v4, v8 + 1e-9);
    EXPECT_LE(v8, v24 + 1e-9);
  }
}

TEST(SolveGeneral, DominatesBaselines) {
  std::mt19937_64 rng(316);
  for (int t = 0; t < 30; ++t) {
    const auto inst = t % 2 ? ts::random_eum_instance(rng, 3, 3) : ts::random_mean_stdev_instance(rng, 3, 3);
    const double v = solve_general(inst, GridSpec{12}).value;
    const auto b = baseline_values(inst);
    EXPECT_GE(v, b.no_info - 1e-9);
    EXPECT_GE(v, b.full_info - 1e-9);
  }
}

TEST(SolveGeneral, ExpectedUtilityNeedsOneSignalPerAction) {
  std::mt19937_64 rng(317);
  for (int t = 0; t < 20; ++t) {
    const auto inst = ts::random_eum_instance(rng, 3, 3);
    const auto plan = coalesce_plan(inst, solve_general(inst, GridSpec{12}));
    for (std::size_t a = 0; a < 3; ++a) EXPECT_LE(plan.decomposition[a].size(), 1u);
    const auto s = scheme_from_plan(plan, inst);
    EXPECT_TRUE(validate_scheme(s, inst).ok());
    EXPECT_NEAR(scheme_value(s, inst), plan.value, 1e-8);
  }
}

TEST(Baselines, ExampleOne) {
  const auto b = baseline_values(ts::example1());
  EXPECT_NEAR(b.no_info, 0.0, 1e-15);
  EXPECT_NEAR(b.full_info, 0.75, 1e-15);
}

TEST(Baselines, ConstantSenderAndDegeneratePrior) {
  std::mt19937_64 rng(318);
  const PersuasionInstance c(StateSpace::numbered(3), ActionSpace({"a", "b"}), Belief({0.2, 0.3, 0.5}),
                             SenderUtility::from_rows({{2, 2}, {2, 2}, {2, 2}}),
                             make_expected(ts::random_table(rng, 3, 2, -1, 1)));
  const auto bc = baseline_values(c);
  EXPECT_NEAR(bc.no_info, 2.0, 1e-12);
  EXPECT_NEAR(bc.full_info, 2.0, 1e-12);
  const auto plan = solve_general(c, GridSpec{6});
  EXPECT_FALSE(benefit_check(c, plan, grid_vertex_sets(c, {6})).benefits);

  const PersuasionInstance d(StateSpace::numbered(3), ActionSpace({"a", "b"}), Belief({0, 1, 0}),
                             SenderUtility::from_rows(ts::random_table(rng, 3, 2, 0, 1)),
                             make_expected(ts::random_table(rng, 3, 2, -1, 1)));
  const auto bd = baseline_values(d);
  EXPECT_NEAR(bd.no_info, bd.full_info, 1e-12);
}

TEST(Benefit, ExampleOne) {
  const auto inst = ts::example1();
  const auto sets = grid_vertex_sets(inst, {12});
  const auto rep = benefit_check(inst, solve_general(inst, sets), sets);
  EXPECT_TRUE(rep.benefits);
  EXPECT_NEAR(rep.gain, 1.0, 1e-9);
  EXPECT_EQ(rep.certificate_action, 1u);
  EXPECT_GT(rep.certificate_value, 0.0);
}

TEST(Benefit, CertificateSignAgreesWithValue) {
  std::mt19937_64 rng(319);
  int benefits = 0;
  for (int t = 0; t < 40; ++t) {
    const auto inst = ts::random_eum_instance(rng, 3, 2 + t % 2);
    const auto sets = grid_vertex_sets(inst, {12});
    const auto rep = benefit_check(inst, solve_general(inst, sets), sets);
    if (rep.benefits) EXPECT_GT(rep.certificate_value, 0.0) << "instance " << t;
    // With the prior strictly inside its action's region, a positive
    // certificate can be mixed in at a small scale.
    const auto br = best_response(inst, inst.prior);
    double margin = 1e300;
    for (std::size_t a = 0; a < inst.num_actions(); ++a)
      if (a != br.selected)
        margin = std::min(margin, inst.receiver.evaluate(inst.prior.weights(), br.selected) -
                                      inst.receiver.evaluate(inst.prior.weights(), a));
    if (margin > 1e-9 && rep.certificate_value > 1e-7) EXPECT_TRUE(rep.benefits) << "instance " << t;
    if (rep.benefits) ++benefits;
  }
  EXPECT_GT(benefits, 5);
}

TEST(FullPersuasion, LinearReceiverOutsideRegion) {
  // Sender always wants action 1; the prior is outside P_1.
  const PersuasionInstance inst(StateSpace::numbered(2), ActionSpace({"a", "b"}), Belief({0.4, 0.6}),
                                SenderUtility::from_rows({{0, 1}, {0, 1}}), make_expected({{0, 1}, {0, -1}}));
  EXPECT_FALSE(full_persuasion_general(inst, GridSpec{10}));
  const PersuasionInstance in(StateSpace::numbered(2), ActionSpace({"a", "b"}), Belief({0.6, 0.4}),
                              SenderUtility::from_rows({{0, 1}, {0, 1}}), make_expected({{0, 1}, {0, -1}}));
  EXPECT_TRUE(full_persuasion_general(in, GridSpec{10}));
  EXPECT_NEAR(solve_general(in, GridSpec{10}).value, 1.0, 1e-10);
}

TEST(FullPersuasion, RequiresUniqueSenderOptimum) {
  const PersuasionInstance inst(StateSpace::numbered(2), ActionSpace({"a", "b"}), Belief({0.4, 0.6}),
                                SenderUtility::from_rows({{1, 1}, {0, 1}}), make_expected({{0, 1}, {0, -1}}));
  EXPECT_THROW(full_persuasion_general(inst, GridSpec{4}), std::invalid_argument);
}

TEST(FullPersuasion, ImpliesFirstBestValue) {
  std::mt19937_64 rng(320);
  int seen = 0;
  for (int t = 0; t < 60; ++t) {
    const auto inst = ts::random_eum_instance(rng, 3, 2);
    const auto sets = grid_vertex_sets(inst, {12});
    bool full = false;
    try {
      full = full_persuasion_general(inst, sets);
    } catch (const std::invalid_argument&) {
      continue;
    }
    if (!full) continue;
    double first_best = 0.0;
    for (std::size_t w = 0; w < 3; ++w) first_best += inst.prior[w] * std::max(inst.sender(w, 0), inst.sender(w, 1));
    EXPECT_NEAR(solve_general(inst, sets).value, first_best, 1e-8);
    ++seen;
  }
  EXPECT_GT(seen, 3);
}

TEST(Concavify, LinearValueFunction) {
  const PersuasionInstance inst(StateSpace::numbered(3), ActionSpace({"only"}), Belief({0.2, 0.3, 0.5}),
                                SenderUtility::from_rows({{1}, {-2}, {3}}), make_expected({{0}, {0}, {0}}));
  EXPECT_NEAR(concavify_oracle(inst, {6}), 0.2 - 0.6 + 1.5, 1e-10);
}
