#include <cstdlib>
#include <iostream>
#include <set>

#include "criteria.hpp"

// Runs every acceptance check, or only the ids given on the command line.
int main(int argc, char** argv) {
    std::set<int> only;
    for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
    int failed = 0;
    for (const auto& c : plap::acceptance::criteria()) {
        if (!only.empty() && !only.count(c.id)) continue;
        const auto row = plap::acceptance::evaluate(c);
        failed += !row.pass;
        std::cout << plap::acceptance::format_row(row) << std::endl;
    }
    return failed == 0 ? 0 : 1;
}
