// Locates the narrow resonances of a repulsive shell, then follows the decay of a packet
// prepared in the first one and compares the fitted rate with the pole width.

#include <cstdio>
#include <vector>

#include "gamow/gamow.hpp"

int main() {
  using namespace gamow;
  const ShellPotential shell(1.0, 2.0, 10.0);
  const ResonanceExpansion expansion = ResonanceExpansion::standard(shell);

  std::printf("%3s %22s %22s %12s\n", "n", "Re z", "Im z", "width");
  for (const auto& s : expansion.resonances()) {
    if (s.pole().n > 6) break;
    std::printf("%3d %22.15f %22.15f %12.6g\n", s.pole().n, s.z().real(), s.z().imag(), s.pole().width());
  }

  const GamowState& first = expansion.resonances().front();
  const WavePacket packet = resonance_packet(first);
  std::vector<double> times;
  for (double t = 0.5; t <= 1500.0; t *= 1.08) times.push_back(t);
  const SurvivalCurve curve = expansion.survival(packet, times, true);

  std::printf("\nsurvival of a packet shaped like resonance 1\n");
  std::printf("  pole width       %.8f\n", first.pole().width());
  std::printf("  fitted decay     %.8f (r^2 = %.10f)\n", curve.fit->gamma_fit, curve.fit->r_squared);
  std::printf("  exponential for  %.1f <= t <= %.1f\n", times[curve.fit->window_begin],
              times[curve.fit->window_end - 1]);
  if (curve.fit->deviation) std::printf("  later times leave the exponential law\n");

  const WavePacket p1 = standard_packet(1);
  const ExpansionReport rep = expansion.expand(p1, p1, 0.5, 6);
  std::printf("\n<P1|exp(-iHt)|P1> at t = 0.5\n");
  std::printf("  direct           % .12f %+.12fi\n", rep.direct.real(), rep.direct.imag());
  std::printf("  6 poles          % .12f %+.12fi\n", rep.pole_sum().real(), rep.pole_sum().imag());
  std::printf("  background       % .12f %+.12fi\n", rep.background.real(), rep.background.imag());
  std::printf("  relative residual  %.3g\n", rep.residual);
  return 0;
}
