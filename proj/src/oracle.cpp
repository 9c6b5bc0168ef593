#include "adacos/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "adacos/error.hpp"

namespace adacos {

namespace {

using Mask = std::uint32_t;

// Mixed-radix index of x with covariates outside `mask` treated as 0.
std::size_t encode(const std::vector<int>& alphabets, std::span<const int> x, Mask mask) {
    std::size_t idx = 0;
    for (std::size_t i = 0; i < alphabets.size(); ++i) {
        const int v = (mask >> i) & 1u ? x[i] : 0;
        idx = idx * static_cast<std::size_t>(alphabets[i]) + static_cast<std::size_t>(v);
    }
    return idx;
}

void decode(const std::vector<int>& alphabets, std::size_t idx, std::vector<int>& x) {
    x.resize(alphabets.size());
    for (std::size_t i = alphabets.size(); i-- > 0;) {
        x[i] = static_cast<int>(idx % static_cast<std::size_t>(alphabets[i]));
        idx /= static_cast<std::size_t>(alphabets[i]);
    }
}

Mask mask_of(const CovariateSet& s) {
    Mask m = 0;
    for (int c : s) m |= Mask{1} << c;
    return m;
}

CovariateSet set_of(Mask m, int p) {
    CovariateSet s;
    for (int i = 0; i < p; ++i)
        if ((m >> i) & 1u) s.push_back(i);
    return s;
}

// Joint mass of (x_S, y) for every mask and partial assignment.
struct Marginals {
    std::size_t outcomes = 0;
    std::vector<double> mass;   // [(mask * outcomes + idx) * 2 + y]

    double at(Mask m, std::size_t idx, int y) const { return mass[(m * outcomes + idx) * 2 + static_cast<std::size_t>(y)]; }
};

Marginals marginals(const DiscreteInstance& inst) {
    Marginals out;
    out.outcomes = inst.outcomes();
    const Mask masks = Mask{1} << inst.p();
    out.mass.assign(masks * out.outcomes * 2, 0.0);
    std::vector<int> x;
    for (std::size_t full = 0; full < out.outcomes; ++full) {
        decode(inst.alphabets, full, x);
        for (Mask m = 0; m < masks; ++m) {
            const std::size_t idx = encode(inst.alphabets, x, m);
            for (int y = 0; y < 2; ++y) out.mass[(m * out.outcomes + idx) * 2 + static_cast<std::size_t>(y)] += inst.pmf[full * 2 + static_cast<std::size_t>(y)];
        }
    }
    return out;
}

// Best label and its mass-weighted cost; ties go to label 1.
std::pair<int, double> classify_cost(const CostModel& costs, double m0, double m1) {
    const double as0 = m0 * costs.misclassification(0, 0) + m1 * costs.misclassification(1, 0);
    const double as1 = m0 * costs.misclassification(0, 1) + m1 * costs.misclassification(1, 1);
    return as1 <= as0 ? std::pair{1, as1} : std::pair{0, as0};
}

} // namespace

std::size_t DiscreteInstance::outcomes() const {
    std::size_t n = 1;
    for (int a : alphabets) n *= static_cast<std::size_t>(a);
    return n;
}

double DiscreteInstance::mass(std::span<const int> x, int y) const {
    return pmf[encode(alphabets, x, (Mask{1} << p()) - 1) * 2 + static_cast<std::size_t>(y)];
}

void DiscreteInstance::validate() const {
    if (alphabets.empty()) throw InputError("instance needs at least one covariate");
    if (alphabets.size() > 16) throw InputError("instance has too many covariates");
    for (int a : alphabets)
        if (a < 1) throw InputError("alphabet sizes must be positive");
    const std::size_t states = outcomes() * (std::size_t{1} << p());
    if (outcomes() > kMaxOracleStates || states > kMaxOracleStates) throw InputError("instance state space is too large");
    if (pmf.size() != outcomes() * 2) throw InputError("pmf has the wrong number of entries");
    double total = 0.0;
    for (double v : pmf) {
        if (!(v >= 0.0)) throw InputError("pmf entries must be nonnegative");
        total += v;
    }
    if (std::abs(total - 1.0) > 1e-12) throw InputError("pmf does not sum to 1");
    costs.validate(p());
    if (!costs.fn_cost) throw InputError("instance needs a false-negative cost");
}

Decision OraclePolicy::decide(const CovariateSet& observed, std::span<const int> values) const {
    std::size_t outcomes = 1;
    for (int a : alphabets) outcomes *= static_cast<std::size_t>(a);
    const Mask m = mask_of(observed);
    return decision.at(m * outcomes + encode(alphabets, values, m));
}

DiscretePolicy OraclePolicy::as_policy() const {
    return [this](const CovariateSet& observed, std::span<const int> values) { return decide(observed, values); };
}

OraclePolicy solve_exact(const DiscreteInstance& inst) {
    inst.validate();
    const int p = inst.p();
    const Marginals marg = marginals(inst);
    const std::size_t outcomes = marg.outcomes;
    const Mask masks = Mask{1} << p;

    OraclePolicy pol;
    pol.alphabets = inst.alphabets;
    pol.value.assign(masks * outcomes, 0.0);
    pol.decision.assign(masks * outcomes, Decision::classify_as(1));

    // masks with more observed covariates first, so successors are ready
    std::vector<Mask> order(masks);
    for (Mask m = 0; m < masks; ++m) order[m] = m;
    std::stable_sort(order.begin(), order.end(),
                     [](Mask a, Mask b) { return __builtin_popcount(a) > __builtin_popcount(b); });

    std::vector<int> x;
    for (Mask m : order) {
        for (std::size_t idx = 0; idx < outcomes; ++idx) {
            decode(inst.alphabets, idx, x);
            bool canonical = true;
            for (int i = 0; i < p; ++i)
                if (!((m >> i) & 1u) && x[static_cast<std::size_t>(i)] != 0) canonical = false;
            if (!canonical) continue;

            const double m0 = marg.at(m, idx, 0), m1 = marg.at(m, idx, 1);
            auto [label, best] = classify_cost(inst.costs, m0, m1);
            Decision choice = Decision::classify_as(label);
            for (int i = 0; i < p; ++i) {
                if ((m >> i) & 1u) continue;
                const Mask next = m | (Mask{1} << i);
                double acquire = inst.costs.covariate_costs[static_cast<std::size_t>(i)] * (m0 + m1);
                for (int v = 0; v < inst.alphabets[static_cast<std::size_t>(i)]; ++v) {
                    x[static_cast<std::size_t>(i)] = v;
                    acquire += pol.value[next * outcomes + encode(inst.alphabets, x, next)];
                }
                x[static_cast<std::size_t>(i)] = 0;
                if (acquire < best) {
                    best = acquire;
                    choice = Decision::acquire({i});
                }
            }
            pol.value[m * outcomes + idx] = best;
            pol.decision[m * outcomes + idx] = choice;
        }
    }
    pol.expected_loss = pol.value[0];
    return pol;
}

double policy_expected_loss(const DiscreteInstance& inst, const DiscretePolicy& policy) {
    inst.validate();
    const Marginals marg = marginals(inst);
    const int p = inst.p();

    std::function<double(Mask, std::vector<int>&)> loss = [&](Mask m, std::vector<int>& values) -> double {
        std::vector<int> x(values.size());
        for (int i = 0; i < p; ++i) x[static_cast<std::size_t>(i)] = (m >> i) & 1u ? values[static_cast<std::size_t>(i)] : 0;
        const std::size_t idx = encode(inst.alphabets, x, m);
        const double m0 = marg.at(m, idx, 0), m1 = marg.at(m, idx, 1);
        if (m0 + m1 == 0.0) return 0.0;

        const Decision d = policy(set_of(m, p), values);
        if (d.kind == Decision::Kind::classify) {
            if (d.label != 0 && d.label != 1) throw InputError("policy emitted an invalid label");
            return m0 * inst.costs.misclassification(0, d.label) + m1 * inst.costs.misclassification(1, d.label);
        }
        if (d.covariates.empty()) throw InputError("policy acquires an empty set");
        Mask add = 0;
        for (int c : d.covariates) {
            if (c < 0 || c >= p) throw InputError("policy acquires an unknown covariate");
            if (((m | add) >> c) & 1u) throw InputError("policy re-acquires covariate " + std::to_string(c));
            add |= Mask{1} << c;
        }
        double total = inst.costs.acquisition_cost(d.covariates) * (m0 + m1);
        // enumerate values of the newly acquired covariates
        std::vector<int> slots = d.covariates;
        std::function<void(std::size_t)> expand = [&](std::size_t k) {
            if (k == slots.size()) {
                total += loss(m | add, values);
                return;
            }
            const auto c = static_cast<std::size_t>(slots[k]);
            for (int v = 0; v < inst.alphabets[c]; ++v) {
                values[c] = v;
                expand(k + 1);
            }
            values[c] = -1;
        };
        expand(0);
        return total;
    };

    std::vector<int> values(static_cast<std::size_t>(p), -1);
    return loss(0, values);
}

DiscretePolicy fixed_subset_policy(const DiscreteInstance& inst, const CovariateSet& subset) {
    const Marginals marg = marginals(inst);
    const Mask target = mask_of(subset);
    const auto alphabets = inst.alphabets;
    const CostModel costs = inst.costs;
    return [marg, target, alphabets, costs, subset](const CovariateSet& observed, std::span<const int> values) {
        const Mask m = mask_of(observed);
        if (m != target) {
            CovariateSet rest;
            for (int c : subset)
                if (!((m >> c) & 1u)) rest.push_back(c);
            return Decision::acquire(rest);
        }
        std::vector<int> x(values.begin(), values.end());
        for (auto& v : x) v = std::max(v, 0);
        const std::size_t idx = encode(alphabets, x, m);
        return Decision::classify_as(classify_cost(costs, marg.at(m, idx, 0), marg.at(m, idx, 1)).first);
    };
}

DiscreteInstance parse_instance(std::string_view json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw InputError(std::string("instance file is not valid JSON: ") + e.what());
    }
    try {
        DiscreteInstance inst;
        inst.alphabets = doc.at("alphabets").get<std::vector<int>>();
        inst.pmf = doc.at("pmf").get<std::vector<double>>();
        inst.costs.covariate_costs = doc.at("covariate_costs").get<std::vector<double>>();
        inst.costs.fp_cost = doc.at("fp_cost").get<double>();
        inst.costs.fn_cost = doc.at("fn_cost").get<double>();
        inst.costs.correct_cost = doc.value("correct_cost", 0.0);
        inst.validate();
        return inst;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("malformed instance file: ") + e.what());
    }
}

DiscreteInstance load_instance(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open instance file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_instance(buf.str());
}

} // namespace adacos
