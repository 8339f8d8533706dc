#pragma once

#include <functional>
#include <string>
#include <vector>

namespace plap::acceptance {

struct Row {
    int id = 0;
    std::string name;
    std::string measured;
    std::string tolerance;
    bool pass = false;
    double seconds = 0;
};

struct Criterion {
    int id;
    std::string name;
    std::function<Row()> run;
};

// The fourteen acceptance checks, in order.
const std::vector<Criterion>& criteria();

// Runs one check, timing it and turning exceptions into a failing row.
Row evaluate(const Criterion& c);

std::string format_row(const Row& r);

}  // namespace plap::acceptance
