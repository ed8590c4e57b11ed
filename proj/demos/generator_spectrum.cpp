// Generates a composite PN stream (two processes plus floors), estimates its
// PSD and prints it next to the model on a log-frequency grid.

#include <cstdio>

#include "pnoise/pnoise.hpp"

int main() {
    using namespace pnoise;
    const CompositeModel model({OscillatorParams::from_db(1e3, -100.0, -160.0),
                                OscillatorParams::from_db(1e5, -95.0)});
    const double ts = 1e-8;
    const PnStream s = gen_composite(model, ts, std::size_t{1} << 22, 7);
    const PsdEstimate e = welch_psd(s.samples, 1.0 / ts, std::size_t{1} << 16);
    const auto avg = log_average(e, 10.0 * e.resolution, 5);
    std::printf("%-12s %-10s %-10s\n", "freq_hz", "est_db", "model_db");
    for (std::size_t k = 0; k < avg.freqs.size(); ++k) {
        const double f = avg.freqs[k];
        if (f > 0.4 / ts) break;
        std::printf("%-12.4g %-10.2f %-10.2f\n", f, db(avg.psd[k]), db(one_sided(composite_psd(model, f))));
    }
}
