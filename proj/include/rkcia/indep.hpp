#ifndef RKCIA_INDEP_HPP
#define RKCIA_INDEP_HPP

#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <string>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>
#include <fmt/format.h>
#include <fmt/ranges.h>
#include <spdlog/spdlog.h>

#include "rkcia/dsep.hpp"
#include "rkcia/graph.hpp"

namespace rkcia {

class QueryOnHidden : public Error {
public:
    using Error::Error;
};

class InvalidData : public Error {
public:
    using Error::Error;
};

enum class Verdict { Independent, Dependent };

/// Conditional-independence oracle over a fixed list of visible variables.
/// Indices in queries are positions in variables(). Implementations must be
/// deterministic and safe to call concurrently.
class IndependenceBackend {
public:
    virtual ~IndependenceBackend() = default;
    virtual const std::vector<Variable>& variables() const = 0;
    virtual Verdict query(NodeId a, NodeId b, const NodeSet& s) const = 0;
    virtual std::string descriptor() const = 0;

    bool independent(NodeId a, NodeId b, const NodeSet& s) const { return query(a, b, s) == Verdict::Independent; }
};

/// Joint probability table, row-major with the last variable varying fastest.
struct ExactDistribution {
    std::vector<Variable> variables;
    std::vector<double> table;

    void validate() const {
        validate_variables(variables);
        std::size_t states = 1;
        for (const auto& v : variables)
            states *= static_cast<std::size_t>(v.arity);
        if (table.size() != states)
            throw InvalidData(fmt::format("probability table has {} entries, expected {}", table.size(), states));
        double total = 0.0;
        for (double p : table) {
            if (!(p >= 0.0))
                throw InvalidData("probability table has a negative or NaN entry");
            total += p;
        }
        if (std::abs(total - 1.0) > 1e-9)
            throw InvalidData(fmt::format("probability table sums to {:.15g}, not 1", total));
    }
};

struct DiscreteDataset {
    std::vector<Variable> variables;
    std::vector<std::vector<int>> rows;

    void validate() const {
        validate_variables(variables);
        for (std::size_t r = 0; r < rows.size(); ++r) {
            if (rows[r].size() != variables.size())
                throw InvalidData(fmt::format("row {} has {} cells, expected {}", r, rows[r].size(), variables.size()));
            for (std::size_t c = 0; c < variables.size(); ++c)
                if (rows[r][c] < 0 || rows[r][c] >= variables[c].arity)
                    throw InvalidData(fmt::format("row {} column {}: state {} outside [0, {})", r, c, rows[r][c],
                                                  variables[c].arity));
        }
    }
};

/// Upper tail P(X >= x) for X ~ chi-square with `df` degrees of freedom.
inline double chi_square_survival(double x, double df) {
    if (x <= 0.0)
        return 1.0;
    return boost::math::gamma_q(df / 2.0, x / 2.0);
}

namespace detail {

inline std::string format_set(const NodeSet& s) {
    return fmt::format("{{{}}}", fmt::join(s, ","));
}

}  // namespace detail

/// Answers queries by d-separation in a known DAG (perfect, faithful oracle).
class OracleBackend final : public IndependenceBackend {
public:
    explicit OracleBackend(Dag g) : dag_(std::move(g)), visible_(dag_.visible()), variables_(visible_variables(dag_)) {}

    const std::vector<Variable>& variables() const override { return variables_; }

    Verdict query(NodeId a, NodeId b, const NodeSet& s) const override {
        NodeSet mapped;
        for (NodeId v : s)
            mapped.push_back(to_dag(v));
        return query_nodes(to_dag(a), to_dag(b), mapped);
    }

    /// Query in the DAG's own index space; hidden nodes are rejected.
    Verdict query_nodes(NodeId a, NodeId b, const NodeSet& s) const {
        const auto check = [&](NodeId v) {
            if (v >= dag_.size() || dag_.node(v).hidden)
                throw QueryOnHidden(fmt::format("oracle query touches non-visible node {}", v));
        };
        check(a);
        check(b);
        for (NodeId v : s)
            check(v);
        return d_separated(dag_, a, b, s) ? Verdict::Independent : Verdict::Dependent;
    }

    std::string descriptor() const override { return "oracle(d-separation)"; }

    const Dag& dag() const { return dag_; }

private:
    NodeId to_dag(NodeId v) const {
        if (v >= visible_.size())
            throw QueryOnHidden(fmt::format("oracle query position {} is not a visible variable", v));
        return visible_[v];
    }

    Dag dag_;
    NodeSet visible_;
    std::vector<Variable> variables_;
};

/// Thresholds the exact conditional mutual information of a joint table.
class ExactBackend final : public IndependenceBackend {
public:
    static constexpr double default_epsilon = 1e-9;

    explicit ExactBackend(ExactDistribution d, double epsilon = default_epsilon) : dist_(std::move(d)), epsilon_(epsilon) {
        dist_.validate();
    }

    const std::vector<Variable>& variables() const override { return dist_.variables; }

    Verdict query(NodeId a, NodeId b, const NodeSet& s) const override {
        return conditional_mutual_information(a, b, s) <= epsilon_ ? Verdict::Independent : Verdict::Dependent;
    }

    std::string descriptor() const override { return fmt::format("exact(cmi<={:g})", epsilon_); }

    /// I(a;b|s) in nats; strata with P(s) = 0 contribute nothing.
    double conditional_mutual_information(NodeId a, NodeId b, const NodeSet& s) const {
        const auto& vars = dist_.variables;
        const std::size_t ra = vars.at(a).arity, rb = vars.at(b).arity;
        std::size_t strata = 1;
        for (NodeId v : s)
            strata *= vars.at(v).arity;
        // joint[stratum][x][y]
        std::vector<double> joint(strata * ra * rb, 0.0);
        std::vector<int> state(vars.size(), 0);
        for (double p : dist_.table) {
            if (p > 0.0) {
                std::size_t st = 0;
                for (NodeId v : s)
                    st = st * vars[v].arity + state[v];
                joint[(st * ra + state[a]) * rb + state[b]] += p;
            }
            for (std::size_t i = vars.size(); i-- > 0;) {
                if (++state[i] < vars[i].arity)
                    break;
                state[i] = 0;
            }
        }
        double cmi = 0.0;
        std::vector<double> pa(ra), pb(rb);
        for (std::size_t st = 0; st < strata; ++st) {
            const double* cell = &joint[st * ra * rb];
            double ps = 0.0;
            std::fill(pa.begin(), pa.end(), 0.0);
            std::fill(pb.begin(), pb.end(), 0.0);
            for (std::size_t x = 0; x < ra; ++x)
                for (std::size_t y = 0; y < rb; ++y) {
                    pa[x] += cell[x * rb + y];
                    pb[y] += cell[x * rb + y];
                    ps += cell[x * rb + y];
                }
            if (ps <= 0.0)
                continue;
            for (std::size_t x = 0; x < ra; ++x)
                for (std::size_t y = 0; y < rb; ++y) {
                    const double p = cell[x * rb + y];
                    if (p > 0.0)
                        cmi += p * std::log(p * ps / (pa[x] * pb[y]));
                }
        }
        return cmi;
    }

    const ExactDistribution& distribution() const { return dist_; }

private:
    ExactDistribution dist_;
    double epsilon_;
};

struct GSquared {
    double statistic = 0.0;
    double df = 0.0;
    std::size_t n = 0;
};

/// G-squared likelihood-ratio test with a chi-square reference distribution.
class GsqBackend final : public IndependenceBackend {
public:
    static constexpr double default_alpha = 0.05;
    // Fewer than this many samples per degree of freedom: report independence.
    static constexpr double min_samples_per_df = 10.0;

    explicit GsqBackend(DiscreteDataset d, double alpha = default_alpha) : data_(std::move(d)), alpha_(alpha) {
        if (!(alpha_ > 0.0 && alpha_ < 1.0))
            throw InvalidData(fmt::format("alpha must lie in (0, 1), got {}", alpha_));
        if (data_.rows.empty())
            throw InvalidData("dataset has no rows");
        data_.validate();
    }

    const std::vector<Variable>& variables() const override { return data_.variables; }

    Verdict query(NodeId a, NodeId b, const NodeSet& s) const override {
        const GSquared g = g_squared(a, b, s);
        if (static_cast<double>(g.n) < min_samples_per_df * g.df) {
            spdlog::debug("gsq: n={} < {}*df={} for ({},{}|{}); treating as independent", g.n, min_samples_per_df, g.df,
                          a, b, detail::format_set(s));
            return Verdict::Independent;
        }
        return chi_square_survival(g.statistic, g.df) >= alpha_ ? Verdict::Independent : Verdict::Dependent;
    }

    std::string descriptor() const override { return fmt::format("gsq(alpha={:g})", alpha_); }

    GSquared g_squared(NodeId a, NodeId b, const NodeSet& s) const {
        const auto& vars = data_.variables;
        const std::size_t ra = vars.at(a).arity, rb = vars.at(b).arity;
        std::size_t strata = 1;
        for (NodeId v : s)
            strata *= vars.at(v).arity;
        std::vector<double> counts(strata * ra * rb, 0.0);
        for (const auto& row : data_.rows) {
            std::size_t st = 0;
            for (NodeId v : s)
                st = st * vars[v].arity + row[v];
            counts[(st * ra + row[a]) * rb + row[b]] += 1.0;
        }
        GSquared out;
        out.n = data_.rows.size();
        out.df = static_cast<double>((ra - 1) * (rb - 1) * strata);
        std::vector<double> row_tot(ra), col_tot(rb);
        for (std::size_t st = 0; st < strata; ++st) {
            const double* cell = &counts[st * ra * rb];
            std::fill(row_tot.begin(), row_tot.end(), 0.0);
            std::fill(col_tot.begin(), col_tot.end(), 0.0);
            double total = 0.0;
            for (std::size_t x = 0; x < ra; ++x)
                for (std::size_t y = 0; y < rb; ++y) {
                    row_tot[x] += cell[x * rb + y];
                    col_tot[y] += cell[x * rb + y];
                    total += cell[x * rb + y];
                }
            for (std::size_t x = 0; x < ra; ++x)
                for (std::size_t y = 0; y < rb; ++y) {
                    const double o = cell[x * rb + y];
                    if (o > 0.0)
                        out.statistic += o * std::log(o * total / (row_tot[x] * col_tot[y]));
                }
        }
        out.statistic *= 2.0;
        return out;
    }

    const DiscreteDataset& dataset() const { return data_; }

private:
    DiscreteDataset data_;
    double alpha_;
};

/// Caches verdicts of another backend keyed by (unordered pair, S).
class MemoizedBackend final : public IndependenceBackend {
public:
    explicit MemoizedBackend(const IndependenceBackend& inner) : inner_(inner) {}

    const std::vector<Variable>& variables() const override { return inner_.variables(); }

    Verdict query(NodeId a, NodeId b, const NodeSet& s) const override {
        Key key{std::min(a, b), std::max(a, b), s};
        {
            std::lock_guard lock(mutex_);
            if (auto it = cache_.find(key); it != cache_.end())
                return it->second;
        }
        const Verdict v = inner_.query(a, b, s);
        std::lock_guard lock(mutex_);
        cache_.emplace(std::move(key), v);
        return v;
    }

    std::string descriptor() const override { return inner_.descriptor(); }

    std::size_t cached() const {
        std::lock_guard lock(mutex_);
        return cache_.size();
    }

private:
    using Key = std::tuple<NodeId, NodeId, NodeSet>;
    const IndependenceBackend& inner_;
    mutable std::mutex mutex_;
    mutable std::map<Key, Verdict> cache_;
};

}  // namespace rkcia

#endif
