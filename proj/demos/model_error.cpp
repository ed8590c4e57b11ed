// Discretization error of the symbol-rate channel model for a PLL-locked
// oscillator (f3db = 10 Hz, -88 dB at 100 kHz) at two symbol rates.

#include <cstdio>

#include "pnoise/pnoise.hpp"

int main() {
    using namespace pnoise;
    const auto osc = OscillatorParams::from_db(10.0, -88.0);
    std::printf("%-10s %-12s %-12s %-12s %-12s %-10s %-12s\n", "rate", "rho", "eta", "eta_d", "eta_isi", "sir_db",
                "alias_norm");
    for (double ts : {1e-7, 1e-8}) {
        const Rho r = rho(osc, ts);
        const auto e = error_breakdown(r);
        std::printf("%-10s %-12.4g %-12.4g %-12.4g %-12.4g %-10.2f %-12.4g\n", ts == 1e-7 ? "10 MBd" : "100 MBd",
                    r.value, e.eta, e.eta_d, e.eta_isi, db(e.sir_linear), normalized_aliasing(osc, ts));
    }
}
