#include <random>

#include <benchmark/benchmark.h>

#include "forcecbf/controller.hpp"
#include "forcecbf/presets.hpp"
#include "forcecbf/simulator.hpp"

namespace {

using namespace forcecbf;

SafetyLimits limits() {
  SafetyLimits l;
  l.w_max.force = Vector3d::Constant(25.0);
  l.w_max.torque = Vector3d::Constant(10.0);
  return l;
}

ControllerParams params() {
  ControllerParams p;
  p.lambda = 10.0;
  return p;
}

// Sixty-four controller states mixing free motion and active barriers.
struct States {
  std::vector<Pose> poses;
  std::vector<Wrench> wrenches;

  States() {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 64; ++i) {
      Pose p;
      p.position = Vector3d(u(rng), u(rng), u(rng)) * 0.2;
      p.orientation = quaternion_exp(Vector3d(u(rng), u(rng), u(rng)) * 0.3);
      poses.push_back(p);
      Vector6d w;
      for (int a = 0; a < 6; ++a) w[a] = u(rng) * (a < 3 ? 30.0 : 12.0);
      wrenches.push_back(Wrench::from_vector(w));
    }
  }
};

void BM_QpSolve(benchmark::State& state) {
  const States s;
  std::vector<qp::QProblem> problems;
  for (int i = 0; i < 64; ++i) {
    problems.push_back(
        assemble_controller_qp(pose_error(s.poses[i], Pose{}), s.wrenches[i], limits(), params()).problem);
  }
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(qp::solve(problems[i++ & 63]));
  }
}
BENCHMARK(BM_QpSolve);

void BM_ControlStep(benchmark::State& state) {
  const States s;
  CbfClfController c(limits(), params());
  std::size_t i = 0;
  for (auto _ : state) {
    const std::size_t k = i++ & 63;
    benchmark::DoNotOptimize(c.step(s.poses[k], Pose{}, s.wrenches[k]));
  }
}
BENCHMARK(BM_ControlStep);

void BM_SimulatorTick(benchmark::State& state) {
  Simulator sim(presets::bag_test());
  for (auto _ : state) {
    if (sim.tick() > 800) sim.reset();
    benchmark::DoNotOptimize(sim.step());
  }
}
BENCHMARK(BM_SimulatorTick);

// Thirty simulated seconds with 1 ms plant steps.
void BM_BagTestRun(benchmark::State& state) {
  const ScenarioConfig c = presets::bag_test();
  for (auto _ : state) benchmark::DoNotOptimize(run_scenario(c));
}
BENCHMARK(BM_BagTestRun)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
