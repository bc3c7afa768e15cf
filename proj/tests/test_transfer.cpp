#include <gtest/gtest.h>

#include <sstream>

#include "circlerds/fixtures.hpp"
#include "circlerds/minimal.hpp"
#include "circlerds/transfer.hpp"
#include "test_util.hpp"

using namespace circlerds;
using fixtures::q;

namespace {

CirclePoint P(long n, long d) { return CirclePoint(n, d); }

const Arc kTrapA = Arc::closed(P(1, 4), P(5, 8));
const Arc kTrapB = Arc::closed(P(3, 4), P(1, 8));

/// Exact Ulam row: where the unit mass of cell k goes, by overlap length.
std::vector<double> brute_push_row(const SystemSpec& s, std::uint32_t n, Cell k) {
  GridApprox g(n);
  std::vector<Rational> out(n, Rational(0));
  for (std::size_t i = 0; i < s.size(); ++i) {
    Arc img = image_arc(s.map(i), g.cell(k));
    Rational len = ccw_offset(img.lo(), img.hi()), w = g.width();
    for (Cell c = 0; c < n; ++c) {
      Rational t = ccw_offset(g.cell(c).lo(), img.lo());
      for (Rational lo : {t, Rational(t - 1)}) {
        Rational a = lo > 0 ? lo : Rational(0), b = lo + len < w ? Rational(lo + len) : w;
        if (a < b) out[c] += s.weights()[i] * (b - a) / len;
      }
    }
  }
  std::vector<double> row;
  for (const auto& r : out) row.push_back(r.get_d());
  return row;
}

GridMeasure mix(const GridMeasure& a, const GridMeasure& b, double t) {
  GridMeasure m{a.resolution, a.mass, 0.0};
  for (std::size_t k = 0; k < m.mass.size(); ++k) m.mass[k] = t * a.mass[k] + (1 - t) * b.mass[k];
  return m;
}

GridMeasure random_measure(std::mt19937_64& rng, std::uint32_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  GridMeasure m{n, std::vector<double>(n), 0.0};
  for (auto& v : m.mass) v = u(rng) < 0.7 ? 0.0 : u(rng);
  m.mass[rng() % n] += 0.1;
  renormalize(m);
  return m;
}

TEST(TransferOperator, AlignedRotationPermutesCells) {
  TransferOperator op(SystemSpec::uniform({Homeo::rotation(q(1, 2))}), 64);
  EXPECT_EQ(op.nonzeros(), 64u);
  for (Cell c = 0; c < 64; ++c) {
    auto m = op.push(GridMeasure::point(64, c));
    EXPECT_EQ(m.mass[(c + 32) % 64], 1.0);
  }
}

TEST(TransferOperator, MatchesExactOverlapOracle) {
  std::mt19937_64 rng(71);
  std::vector<SystemSpec> systems{fixtures::example71(), fixtures::split_case(),
                                  SystemSpec::uniform({Homeo::rotation(q(1, 3))}),
                                  SystemSpec({fixtures::example_f1(), fixtures::example_f3()}, {q(2, 3), q(1, 3)})};
  for (int k = 0; k < 4; ++k)
    systems.push_back(SystemSpec::uniform({testutil::random_pl(rng, true, 5, 128), testutil::random_pl(rng, false, 5, 128)}));
  for (const auto& s : systems) {
    TransferOperator op(s, 64);
    for (Cell c = 0; c < 64; ++c) {
      auto got = op.push(GridMeasure::point(64, c));
      auto want = brute_push_row(s, 64, c);
      for (Cell t = 0; t < 64; ++t) ASSERT_NEAR(got.mass[t], want[t], 1e-12) << s.label() << " " << c << "->" << t;
    }
  }
}

TEST(TransferOperator, LebesgueIsInvariantForIsometries) {
  for (const auto& s : {fixtures::rotation(), fixtures::single_reflection(),
                        SystemSpec::uniform({Homeo::rotation(q(1, 3)), Homeo::reflection(q(1, 5))})}) {
    auto m = push_measure(s, GridMeasure::uniform(4096));
    for (double v : m.mass) ASSERT_NEAR(v, 1.0 / 4096, 1e-15) << s.label();
  }
}

TEST(TransferOperator, RejectsMismatchedResolution) {
  TransferOperator op(fixtures::example71(), 64);
  EXPECT_THROW(op.push(GridMeasure::uniform(128)), Error);
  EXPECT_THROW(op.cesaro(P(1, 3), 0), Error);
}

TEST(TransferProperty, LinearAndMassPreserving) {
  std::mt19937_64 rng(72);
  std::vector<SystemSpec> systems{fixtures::example71(), fixtures::split_case(), fixtures::rotation()};
  for (const auto& s : systems) {
    TransferOperator op(s, 256);
    for (int trial = 0; trial < 30; ++trial) {
      GridMeasure a = random_measure(rng, 256), b = random_measure(rng, 256);
      double t = std::uniform_real_distribution<double>(0, 1)(rng);
      GridMeasure lhs = op.push(mix(a, b, t)), rhs = mix(op.push(a), op.push(b), t);
      for (std::size_t k = 0; k < 256; ++k) ASSERT_NEAR(lhs.mass[k], rhs.mass[k], 1e-14);
      EXPECT_LT(lhs.drift, 1e-12);
      EXPECT_NEAR(lhs.total(), 1.0, 1e-12);
      for (double v : lhs.mass) ASSERT_GE(v, 0.0);
    }
  }
}

TEST(Cesaro, SingleStepIsCellIndicator) {
  SystemSpec s = fixtures::example71();
  for (long k : {0L, 5L, 77L, 4095L}) {
    CirclePoint x(make_rational(2 * k + 1, 8192));
    auto m = cesaro_average(s, x, 1);
    EXPECT_EQ(m.mass[static_cast<std::size_t>(k)], 1.0);
    EXPECT_EQ(support_cells(m).size(), 1u);
  }
}

TEST(Cesaro, TrappingRegionsKeepTheirMass) {
  TransferOperator op(fixtures::example71(), 4096);
  // Both traps are cell-aligned and invariant, so no mass can leave.
  EXPECT_GE(mass_in_arcs(op.cesaro(P(7, 16), 1000), {kTrapA}), 0.99);
  EXPECT_GE(mass_in_arcs(op.cesaro(P(15, 16), 1000), {kTrapB}), 0.99);
  // Started between the traps, the averages split evenly by symmetry.
  auto mid = op.cesaro(P(3, 16), 2000);
  double a = mass_in_arcs(mid, {kTrapA}), b = mass_in_arcs(mid, {kTrapB});
  EXPECT_GT(a + b, 0.95);
  EXPECT_NEAR(a, b, 0.05);
}

TEST(Cesaro, AveragesSettle) {
  TransferOperator op(fixtures::example71(), 4096);
  std::vector<double> gaps;
  for (std::size_t N : {50u, 200u, 800u}) gaps.push_back(sup_cdf_distance(op.cesaro(P(15, 16), N), op.cesaro(P(15, 16), 2 * N)));
  EXPECT_GT(gaps[0], gaps[2]);
  EXPECT_LT(gaps[2], 0.05);
}

TEST(StationaryMeasures, WorkedExample) {
  SystemSpec s = fixtures::example71();
  TransferOperator op(s, 4096);
  auto K = minimal_sets(s, GridApprox(4096));
  auto mus = stationary_measures(op, K, 2000);
  ASSERT_EQ(mus.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) EXPECT_GE(mass_in_arcs(mus[i], K[i].arcs), 0.999);

  // The limit does not depend on the starting point inside K_i.
  auto other = op.cesaro(K[1].arcs[0].lo(), 2000);
  EXPECT_LT(sup_cdf_distance(other, mus[1]), 0.02);

  auto d = decompose(op.cesaro(P(3, 16), 2000), mus);
  EXPECT_NEAR(d.t[0] + d.t[1] + d.residual, 1.0, 1e-12);
  EXPECT_NEAR(d.t[0], d.t[1], 0.05);
  EXPECT_GT(d.t[0] + d.t[1], 0.9);
}

TEST(StationaryMeasures, SupportLeakIsReported) {
  SystemSpec s = fixtures::example71();
  auto K = minimal_sets(s, GridApprox(4096));
  // Claim K_1 sits left of its true position: the measure drifts away.
  K[0].arcs = {Arc::closed(P(1, 4), P(5, 16))};
  try {
    stationary_measures(s, K, 500);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SupportLeak);
  }
}

TEST(Decompose, Examples) {
  GridMeasure a = GridMeasure::point(64, 3), b = GridMeasure::point(64, 40);
  auto d = decompose(mix(a, b, 0.25), {a, b});
  EXPECT_DOUBLE_EQ(d.t[0], 0.25);
  EXPECT_DOUBLE_EQ(d.t[1], 0.75);
  EXPECT_EQ(d.residual, 0.0);

  GridMeasure u = GridMeasure::uniform(64);
  auto r = decompose(u, {a, b});
  EXPECT_NEAR(r.residual, 62.0 / 64, 1e-15);

  try {
    decompose(u, {a, mix(a, b, 0.5)});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NondisjointSupports);
  }
  EXPECT_THROW(decompose(u, {}), Error);
  EXPECT_THROW(decompose(u, {GridMeasure::point(128, 0)}), Error);
}

TEST(SupportCells, BoundaryCount) {
  GridMeasure m{64, std::vector<double>(64, 0.0), 0.0};
  for (Cell c : {62u, 63u, 0u, 1u, 10u}) m.mass[c] = 0.2;
  EXPECT_EQ(support_cells(m).size(), 5u);
  EXPECT_EQ(boundary_cell_count(m), 3u);  // 62, 1 and the isolated 10
  EXPECT_EQ(boundary_cell_count(GridMeasure::uniform(64)), 0u);
}

TEST(MeasureCsv, RoundTrip) {
  std::mt19937_64 rng(73);
  for (int trial = 0; trial < 5; ++trial) {
    GridMeasure m = random_measure(rng, 128);
    std::stringstream ss;
    write_measure_csv(m, ss);
    GridMeasure back = read_measure_csv(ss);
    ASSERT_EQ(back.resolution, 128u);
    for (std::size_t k = 0; k < 128; ++k) EXPECT_NEAR(back.mass[k], m.mass[k], 1e-16);
  }
  std::stringstream header("index,mass\n0,1\n");
  EXPECT_THROW(read_measure_csv(header), Error);
  std::stringstream odd;
  odd << "cell_index,lo,hi,mass\n";
  for (int c = 0; c < 100; ++c) odd << c << ",0,0,0.01\n";
  EXPECT_THROW(read_measure_csv(odd), Error);
}

TEST(TransferProperty, DeterministicAcrossWorkers) {
  SystemSpec s = fixtures::split_case();
  TransferOperator one(s, 8192, 1), four(s, 8192, 4);
  GridMeasure a = one.cesaro(P(1, 3), 40), b = four.cesaro(P(1, 3), 40);
  EXPECT_EQ(a.mass, b.mass);
}

}  // namespace
