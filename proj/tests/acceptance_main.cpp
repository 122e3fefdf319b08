// Acceptance suite runner: executes the acceptance criteria (all by default
// or a --criterion subset), prints one pass/fail line per check, and exits
// nonzero on any failure.

#include <cstring>
#include <iostream>
#include <string>
#include <vector>

#include "caginalp/verification.hpp"

int main(int argc, char** argv) {
    caginalp::SuiteOptions opts;
    std::vector<int> criteria;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--criterion" && i + 1 < argc) {
            criteria.push_back(std::stoi(argv[++i]));
        } else if (arg == "--seed" && i + 1 < argc) {
            opts.seed = std::stoull(argv[++i]);
        } else if (arg == "--quiet") {
            opts.verbose = false;
        } else {
            std::cerr << "usage: acceptance [--criterion K]... [--seed N] [--quiet]\n";
            return 2;
        }
    }
    if (!criteria.empty()) opts.criteria = criteria;

    caginalp::SuiteReport report = caginalp::run_acceptance_suite(opts);
    int passed = 0, failed = 0;
    for (const auto& e : report.entries) (e.pass ? passed : failed) += 1;
    std::cout << "acceptance: " << passed << " passed, " << failed << " failed\n";
    return report.all_pass ? 0 : 1;
}
