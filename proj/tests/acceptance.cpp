#include "permuton/verify.hpp"

#include <algorithm>
#include <iostream>

int main() {
    using namespace permuton::verify;
    Options options;
    options.suite = Suite::full;
    const auto results = run(options, [](const CriterionResult& r) { std::cout << format_line(r) << std::endl; });
    const auto passed = std::count_if(results.begin(), results.end(), [](const auto& r) { return r.passed; });
    std::cout << passed << "/" << results.size() << " acceptance criteria passed\n";
    return passed == static_cast<long>(results.size()) ? 0 : 1;
}
