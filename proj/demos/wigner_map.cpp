#include <cstdio>

#include "catcomp/catcomp.hpp"

using namespace catcomp;

// Writes an odd cat's characteristic function and Wigner function after 40 us of loss.
int main(int argc, char** argv) {
    const std::string out = argc > 1 ? argv[1] : "wigner_map";
    DeviceParams d;
    SpaceSpec s(60);
    CharGrid c = char_function(make_cat(1.8, -1, s), GridAxes::square(-7, 7, 201), "cat");
    CharGrid ct = loss_filter_char(c, d.kappa(), 40e-6);
    WignerGrid w = wigner_from_char(ct);
    io::RunDirectory dir(out);
    dir.grid("charfun", ct);
    dir.grid("wigner", w);
    dir.flush({{"parity_char", parity_from_char(ct)}, {"W0", w.at_origin()}, {"integral", w.integral()}});
    std::printf("parity %.4f  W(0) %.4f  integral %.4f -> %s/\n", parity_from_char(ct), w.at_origin(), w.integral(), out.c_str());
}
