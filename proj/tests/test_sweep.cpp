#include "support.hpp"

#include "opfgrad/errors.hpp"
#include "opfgrad/jacobian.hpp"
#include "opfgrad/sweep.hpp"

#include <doctest.h>

#include <set>

using namespace opfgrad;
using namespace testing;

namespace {

const Axis kA{"load 4", 0.0, 7.0, 40};
const Axis kB{"load 7", 0.0, 7.0, 40};

Eigen::VectorXd plane_load(double s4, double s7) {
  Eigen::VectorXd load = case9().base_load;
  load[0] = s4;
  load[3] = s7;
  return load;
}

BindingSet make_set(std::vector<BoundIndex> g, std::vector<BoundIndex> b) {
  BindingSet s;
  s.gens = std::move(g);
  s.branches = std::move(b);
  return s;
}

}  // namespace

TEST_CASE("region classes") {
  CHECK(classify(make_set({}, {})) == RegionClass::None);
  CHECK(classify(make_set({{0, Side::Lower}, {1, Side::Upper}}, {})) == RegionClass::TwoGens);
  CHECK(classify(make_set({{0, Side::Lower}}, {{2, Side::Lower}})) == RegionClass::GenBranch);
  CHECK(classify(make_set({}, {{2, Side::Lower}, {8, Side::Upper}})) == RegionClass::TwoBranches);
}

TEST_CASE("axis cell centers") {
  const Axis a{"a", 0.0, 7.0, 200};
  CHECK(a.at(0) == doctest::Approx(0.0175));
  CHECK(a.at(199) == doctest::Approx(6.9825));
}

TEST_CASE("load plane scan") {
  const OpfContext ctx = case9_context();
  const RegionGrid g = scan_load_plane(ctx, case9().base_load, 0, 3, kA, kB);
  CHECK(g.cells.size() == 1600u);
  CHECK(g.count(CellStatus::Infeasible) + g.feasible_cells() == 1600);

  SUBCASE("cells agree with direct solves") {
    for (int iy = 0; iy < 40; iy += 7)
      for (int ix = 0; ix < 40; ix += 5) {
        const Cell& c = g.cell(ix, iy);
        const std::string want = region_at(ctx, plane_load(kA.at(ix), kB.at(iy)));
        if (want == "infeasible") CHECK(c.status == CellStatus::Infeasible);
        else if (c.status == CellStatus::Regular)
          CHECK(g.regions[c.region].binding.canonical() == want);
      }
  }
  SUBCASE("region bookkeeping") {
    int total = 0;
    for (const auto& r : g.regions) {
      total += r.cells;
      CHECK(r.hash == r.binding.hash());
      CHECK(r.area_fraction == doctest::Approx(double(r.cells) / g.feasible_cells()));
      CHECK(r.cls == classify(r.binding));
      CHECK(r.jacobian.rows() == 3);
    }
    CHECK(total == g.count(CellStatus::Regular));
  }
  SUBCASE("csv has one row per cell") {
    const std::string csv = g.to_csv();
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1601);
    CHECK(csv.rfind("x,y,status,region_hash,class\n", 0) == 0);
  }
  SUBCASE("thread count does not change the result") {
    ScanOptions opts;
    opts.threads = 4;
    const RegionGrid h = scan_load_plane(ctx, case9().base_load, 0, 3, kA, kB, opts);
    CHECK(h.to_csv() == g.to_csv());
    CHECK(h.to_json() == g.to_json());
  }
}

TEST_CASE("fully infeasible plane") {
  const Axis a{"a", 20.0, 30.0, 8}, b{"b", 20.0, 30.0, 8};
  const RegionGrid g = scan_load_plane(case9_context(), case9().base_load, 0, 3, a, b);
  CHECK(g.count(CellStatus::Infeasible) == 64);
  CHECK(g.regions.empty());
  CHECK(g.degenerate_fraction() == 0.0);
}

TEST_CASE("secants inside a region follow the jacobian") {
  const OpfContext ctx = case9_context();
  const RegionGrid g = scan_load_plane(ctx, case9().base_load, 0, 3, kA, kB);
  for (const auto& r : g.regions) {
    const Eigen::VectorXd a = plane_load(r.x, r.y);
    for (const auto& [dx, dy] : {std::pair{0.01, 0.0}, std::pair{0.0, 0.01}, std::pair{-0.01, 0.01}}) {
      const Eigen::VectorXd b = plane_load(r.x + dx, r.y + dy);
      if (region_at(ctx, b) != r.binding.canonical()) continue;
      const Eigen::VectorXd ds = solve_opf(ctx, b).sg - solve_opf(ctx, a).sg;
      CHECK(max_abs(ds - r.jacobian * (b - a)) <= 1e-8);
    }
  }
}

TEST_CASE("positive load feasibility") {
  const OpfContext ctx = case9_context();
  const LoadBox box = LoadBox::plane(case9().base_load, 0, 0.0, 7.0, 3, 0.0, 7.0);
  CHECK(positive_load_feasible(ctx.net, ctx.limits, box));
  const LoadBox heavy = LoadBox::plane(case9().base_load, 0, 20.0, 30.0, 3, 20.0, 30.0);
  CHECK_FALSE(positive_load_feasible(ctx.net, ctx.limits, heavy));
}

TEST_CASE("limit plane cells") {
  const OpfContext ctx = case9_context();
  const LoadBox box = LoadBox::plane(case9().base_load, 0, 0.0, 7.0, 3, 0.0, 7.0);
  LimitScanOptions opts;
  SUBCASE("reversed limits are infeasible") {
    CHECK(probe_limit_cell(ctx, box, 8, 1.0, 0.5, opts, 1).status == CellStatus::Infeasible);
  }
  SUBCASE("red point is regular") {
    const LimitCellProbe p = probe_limit_cell(ctx, box, 8, -2.5490, 2.5695, opts, 1);
    CHECK(p.status == CellStatus::Regular);
    CHECK(p.tested == opts.samples);
  }
  SUBCASE("black point is degenerate") {
    const LimitCellProbe p = probe_limit_cell(ctx, box, 8, -3.0758, 3.0758, opts, 1);
    CHECK(p.status == CellStatus::Degenerate);
    CHECK(p.irregular > 0);
  }
  SUBCASE("small scan") {
    const Axis lo{"p_min", -4.0, 0.0, 4}, hi{"p_max", -1.0, 4.0, 5};
    const RegionGrid g = scan_limit_plane(ctx, box, 8, lo, hi, opts);
    CHECK(g.cells.size() == 20u);
    for (int iy = 0; iy < 5; ++iy)
      for (int ix = 0; ix < 4; ++ix)
        if (lo.at(ix) >= hi.at(iy)) CHECK(g.cell(ix, iy).status == CellStatus::Infeasible);
  }
}

TEST_CASE("path through a constant load") {
  const OpfContext ctx = case9_context();
  const PathTrace p = trace_load_path(ctx, {plane_load(1.0, 1.0), plane_load(1.0, 1.0)}, 10);
  CHECK(p.samples.size() == 10u);
  CHECK(p.region_changes.empty());
  CHECK(p.max_affine_residual() <= 1e-12);
}

TEST_CASE("path across regions") {
  const OpfContext ctx = case9_context();
  const std::vector<Eigen::VectorXd> way{plane_load(0.5, 0.5), plane_load(4.0, 0.5),
                                         plane_load(4.0, 4.0), plane_load(0.5, 4.0)};
  const PathTrace p = trace_load_path(ctx, way, 50);
  REQUIRE(p.samples.size() == 50u);
  CHECK(p.samples.front().t == 0.0);
  CHECK(p.samples.back().t == 1.0);
  CHECK(max_abs(p.samples.back().load - way.back()) <= 1e-12);
  const CapacityLimits& lim = ctx.limits;
  std::set<std::string> seen;
  for (const auto& s : p.samples) {
    if (s.status != LpStatus::Optimal) continue;
    seen.insert(s.hash);
    CHECK((s.sg - lim.sg_min).minCoeff() >= -1e-9);
    CHECK((lim.sg_max - s.sg).minCoeff() >= -1e-9);
    CHECK(std::abs(s.sg.sum() - s.load.sum()) <= 1e-9);
  }
  CHECK(seen.size() >= 2u);
  CHECK(p.max_affine_residual() <= 1e-8);
  int covered = 0;
  for (const auto& [b, e] : p.segments) {
    CHECK(b < e);
    for (int k = b + 1; k < e; ++k) CHECK(p.samples[k].hash == p.samples[b].hash);
    covered += e - b;
  }
  CHECK(covered == 50);
  const std::string csv = p.to_csv();
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 51);
}
