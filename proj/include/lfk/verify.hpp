#pragma once

#include <string>
#include <vector>

namespace lfk {

struct CriterionResult {
    int id = 0; // 1..10 for the acceptance matrix, 0 for fast-suite extras
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

enum class VerifySuite { Fast, Full };

// Fast: closed-form identities only (sub-second).  Full: the complete
// numerical acceptance matrix (a few minutes on one core).
std::vector<CriterionResult> run_verification(VerifySuite suite);

} // namespace lfk
