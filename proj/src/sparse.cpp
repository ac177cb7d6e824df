#include "driftbench/sparse.hpp"

namespace driftbench {

double sparse_sq_dist(const SparseVector& a, const SparseVector& b) {
    double s = 0.0;
    size_t i = 0, j = 0;
    while (i < a.entries.size() && j < b.entries.size()) {
        int32_t ia = a.entries[i].index, ib = b.entries[j].index;
        if (ia == ib) {
            double d = a.entries[i].value - b.entries[j].value;
            s += d * d;
            ++i;
            ++j;
        } else if (ia < ib) {
            s += a.entries[i].value * a.entries[i].value;
            ++i;
        } else {
            s += b.entries[j].value * b.entries[j].value;
            ++j;
        }
    }
    for (; i < a.entries.size(); ++i) s += a.entries[i].value * a.entries[i].value;
    for (; j < b.entries.size(); ++j) s += b.entries[j].value * b.entries[j].value;
    return s;
}

double sparse_dot(const SparseVector& a, const SparseVector& b) {
    double s = 0.0;
    size_t i = 0, j = 0;
    while (i < a.entries.size() && j < b.entries.size()) {
        int32_t ia = a.entries[i].index, ib = b.entries[j].index;
        if (ia == ib) {
            s += a.entries[i].value * b.entries[j].value;
            ++i;
            ++j;
        } else if (ia < ib) {
            ++i;
        } else {
            ++j;
        }
    }
    return s;
}

std::string to_string(Granularity g) {
    switch (g) {
    case Granularity::Monthly: return "monthly";
    case Granularity::Quarterly: return "quarterly";
    case Granularity::SyntheticStep: return "synthetic-step";
    }
    return "synthetic-step";
}

Granularity granularity_from_string(const std::string& s) {
    if (s == "monthly") return Granularity::Monthly;
    if (s == "quarterly") return Granularity::Quarterly;
    if (s == "synthetic-step") return Granularity::SyntheticStep;
    throw ConfigError("unknown granularity: " + s);
}

} // namespace driftbench
