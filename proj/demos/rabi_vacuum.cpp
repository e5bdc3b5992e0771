// Excited two-level atom in an empty detuned cavity: exact vs master equation vs
// semiclassical drive. Prints a few samples of the ground-state population.

#include <cstdio>

#include "qcme/metrics.hpp"
#include "qcme/scenario.hpp"

int main() {
  qcme::ScenarioConfig c = qcme::find_preset("fig1C");
  c.methods = {qcme::Method::Exact, qcme::Method::Qcme2, qcme::Method::SemiclassicalEeff};
  const qcme::RunResult r = qcme::run_scenario(c);

  const auto& t = r.series(qcme::Method::Exact).times;
  const auto& exact = r.series(qcme::Method::Exact).channel("P_g");
  const auto& qcme2 = r.series(qcme::Method::Qcme2).channel("P_g");
  const auto& semi = r.series(qcme::Method::SemiclassicalEeff).channel("P_g");

  std::printf("%10s %14s %14s %14s\n", "t", "exact", "qcme2", "semi(Eeff)");
  for (std::size_t k = 0; k < t.size(); k += t.size() / 20)
    std::printf("%10.3f %14.6e %14.6e %14.6e\n", t[k], exact[k], qcme2[k], semi[k]);

  std::printf("\nmean |error|: qcme2 %.3e, semi %.3e\n", qcme::mean_abs_difference(qcme2, exact),
              qcme::mean_abs_difference(semi, exact));
}
