#include <cstdio>

#include "catcomp/catcomp.hpp"

using namespace catcomp;

int main() {
    SpaceSpec s(60);
    for (int row : {-3, -5, -6, -7}) {
        ProtocolResult r = run_compression(reference_schedule(row), s);
        std::printf("row %3d dB: X %+.2f dB  P %+.2f dB  purity %.4f\n", row,
                    measure_compression_db(r.cavity_state, Quadrature::X).db,
                    measure_compression_db(r.cavity_state, Quadrature::P).db, purity(r.cavity_state));
    }

    // -6 row, then V(final_v) and projection on e: an odd cat compressed by about 6.7 dB
    const double r = squeeze_r_from_db(-6.7);
    CompressionSchedule sch = reference_schedule(-6);
    sch.final_v = cat_final_v(1.8, r);
    ProtocolResult cat = create_compressed_cat(sch, s, QubitLabel::e);
    std::printf("cat: p(e) %.3f  parity %+.4f  fidelity to S(r) cat(1.8) %.4f\n", cat.outcome_probability,
                parity_fock(cat.cavity_state), state_fidelity(make_squeezed_cat(1.8, r, 0.0, -1, s), cat.cavity_state));
}
