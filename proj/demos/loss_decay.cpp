#include <cstdio>

#include "catcomp/catcomp.hpp"

using namespace catcomp;

int main() {
    DeviceParams d;
    std::vector<double> t = time_axis(300e-6, 31);
    for (const DecayClass& c : default_classes()) {
        const int n = auto_cavity_dim([&](const SpaceSpec& s) { return class_state(c, s); });
        PureState st = class_state(c, SpaceSpec(n));
        BlobSeries b = decay_scan(st, t, d, class_blob_center(c));
        ParitySeries p = parity_scan(st, t, d);
        std::printf("%-13s blob tau %6.1f us (band %.0f-%.0f)  parity tau %6.1f us  fringe contrast @100us %.3f\n",
                    c.label.c_str(), b.tau() * 1e6, b.band_lo * 1e6, b.band_hi * 1e6, p.tau() * 1e6,
                    subplanck_after_loss(st, 100e-6, d).contrast);
    }
}
