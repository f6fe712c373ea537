// Acceptance gate: runs the full verification matrix and prints one line per
// criterion.  Exit status 0 iff every criterion passes.
#include <cstdio>

#include "lfk/verify.hpp"

int main() {
    const auto results = lfk::run_verification(lfk::VerifySuite::Full);
    bool all = true;
    double total = 0.0;
    for (const auto& r : results) {
        std::printf("[%s] criterion %02d %-28s (%6.2fs)  %s\n",
                    r.pass ? "PASS" : "FAIL", r.id, r.name.c_str(), r.seconds,
                    r.detail.c_str());
        std::fflush(stdout);
        all = all && r.pass;
        total += r.seconds;
    }
    std::printf("%s (%zu criteria, %.1fs)\n",
                all ? "ACCEPTANCE PASSED" : "ACCEPTANCE FAILED", results.size(),
                total);
    return all ? 0 : 1;
}
