#pragma once

#include "induct/pddl.hpp"

#include <cstdint>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace induct::belief {

class BeliefError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Kind { Pre, Post };
std::string to_string(Kind k);

/// One connector on the way from a tree root to a statement leaf.
struct Step {
    enum class Type { And, Or, When, Exists };

    Type type = Type::And;
    /// Distinguishes sibling or/exists nodes (and conjunctions under an or); 1 for the first.
    int ordinal = 1;
    pddl::Condition antecedent;            // When
    std::vector<pddl::TypedName> variables; // Exists

    bool operator==(const Step&) const = default;

    /// "and", "or", "or2", "when(clear ?x)", "exists(?x - block)".
    std::string token() const;
};

/// A statement leaf of one action's precondition or effect tree.
struct Statement {
    std::string action;
    Kind kind = Kind::Pre;
    std::vector<Step> chain;
    pddl::Literal literal;
    double belief = 0.0;
    std::string path_key;
    /// Key of the sibling with the opposite literal (it may not exist yet).
    std::string negation_key;
};

struct BeliefConfig {
    double alpha = 0.7;
    double beta = 0.8;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Predicted pre/post trees for each action; membership is binary.
struct ActionSemantics {
    pddl::Condition precondition = pddl::Condition::conj();
    pddl::Condition effect = pddl::Condition::conj();

    bool operator==(const ActionSemantics&) const = default;
};

struct ProposedSemantics {
    std::map<std::string, ActionSemantics> actions;

    bool operator==(const ProposedSemantics&) const = default;

    static ProposedSemantics from_domain(const pddl::Domain& d);
};

pddl::Literal negate(const pddl::Literal& l);

/// The scalar rule. `in`: the statement was predicted; `neg_in`: its negation was.
double update_belief(double prior, bool in, bool neg_in, const BeliefConfig& cfg);

/// Splits a tree into its statement leaves in tree order. A root that is not an
/// And is wrapped in one; nested conjunctions under an And are flattened, as are
/// the consequents of conditional effects.
std::vector<Statement> decompose(const std::string& action, Kind kind, const pddl::Condition& root);

std::vector<std::string> enumerate_paths(const std::string& action, Kind kind, const pddl::Condition& root);
std::vector<std::string> enumerate_paths(const ProposedSemantics& s);
std::vector<std::string> enumerate_paths(const pddl::Domain& d);

/// Rebuilds a condition from leaves sharing one tree (empty connectors dropped; root And kept).
pddl::Condition assemble(const std::vector<const Statement*>& leaves);

/// Per-action belief trees, stored as leaves in first-seen order.
class Memory {
public:
    const std::vector<Statement>& leaves() const { return leaves_; }
    bool empty() const { return leaves_.empty(); }
    const Statement* find(const std::string& path_key) const;
    const Statement* negation(const Statement& s) const { return find(s.negation_key); }
    double belief(const std::string& path_key) const;

    /// Applies the update rule to every known leaf and every predicted one.
    Memory update(const ProposedSemantics& proposed, const BeliefConfig& cfg) const;

    /// Bernoulli draw per leaf in storage order; actions follow the skeleton.
    pddl::Domain sample(const pddl::Domain& skeleton, std::mt19937_64& rng) const;
    /// Leaves with belief >= threshold.
    pddl::Domain threshold_domain(const pddl::Domain& skeleton, double threshold = 0.5) const;
    std::vector<std::string> paths_at_threshold(double threshold = 0.5) const;
    std::vector<std::string> paths() const;

    /// Line records: action, kind, path key, belief (tab separated).
    std::string serialize() const;
    static Memory deserialize(const std::string& text, const pddl::Domain& skeleton);

    /// Direct belief assignment, for tests and tooling.
    void set_belief(const std::string& path_key, double p);

private:
    void insert(Statement s);

    std::vector<Statement> leaves_;
    std::map<std::string, std::size_t> index_;
};

/// Uniform double in [0,1) from a 64-bit engine (53-bit mantissa).
inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace induct::belief
