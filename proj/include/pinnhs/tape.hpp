#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "pinnhs/dual.hpp"
#include "pinnhs/errors.hpp"

namespace pinnhs {

// Reverse-mode tape. A Tape is a topologically ordered list of scalar
// operations: every operand index is smaller than the node's own index, so a
// single forward sweep evaluates the function and a single backward sweep
// accumulates all adjoints (two passes total).
//
// The tape structure is immutable after construction. All evaluation state
// lives in a caller-owned Workspace, so concurrent evaluations of one tape
// from several threads are safe as long as each uses its own workspace.

enum class OpKind : std::uint8_t {
    kInput,
    kConst,
    kAdd,
    kSub,
    kMul,
    kDiv,
    kPow,  // constant exponent, stored in payload
    kExp,
    kLog,
    kSin,
    kCos,
    kTanh,
};

struct Node {
    OpKind op;
    std::uint32_t a = 0;  // operand index; input slot for kInput
    std::uint32_t b = 0;
};

class Tape;

// Lightweight handle used to build expressions on a tape.
struct Expr {
    Tape* tape = nullptr;
    std::uint32_t index = 0;
};

template <typename T>
struct Workspace {
    std::vector<T> values;
    std::vector<T> adjoints;
};

class Tape {
public:
    // -- construction ------------------------------------------------------
    Expr input(const std::string& name);
    Expr constant(double value);
    Expr emit(OpKind op, std::uint32_t a, std::uint32_t b, double payload = 0.0);
    void set_output(Expr e);

    std::size_t size() const { return nodes_.size(); }
    std::size_t num_inputs() const { return input_nodes_.size(); }
    bool has_output() const { return output_set_; }
    std::uint32_t output_index() const { return output_; }
    const std::vector<std::string>& input_names() const { return input_names_; }
    const Node& node(std::uint32_t i) const { return nodes_[i]; }
    double payload(std::uint32_t i) const { return payload_[i]; }
    std::uint32_t input_node(std::uint32_t slot) const { return input_nodes_[slot]; }

    // Slot lookup; throws UnboundVariableError on unknown names.
    std::uint32_t slot_of(const std::string& name) const;

    // -- evaluation (positional fast path) -----------------------------------
    // Values are indexed by node; inputs are bound by slot order.
    template <typename T>
    const T& evaluate_into(std::span<const T> inputs, Workspace<T>& ws) const;

    // Backward sweep; requires evaluate_into to have filled ws.values.
    // Seeds the output adjoint with 1 and accumulates in reverse topological
    // order (fixed order, reproducible bit-for-bit).
    template <typename T>
    void reverse_into(Workspace<T>& ws) const;

    // -- named API -----------------------------------------------------------
    // Checked evaluation: every bound variable must exist, every intermediate
    // must be finite (violations name the offending variable or node).
    double evaluate(const std::map<std::string, double>& inputs) const;
    std::map<std::string, double> gradient(const std::map<std::string, double>& inputs) const;
    // Forward-over-reverse: reverse pass in Dual arithmetic with the tangent
    // seeded on `wrt`; returns d²f / d(and_then) d(wrt).
    double second_derivative(const std::map<std::string, double>& inputs,
                             const std::string& wrt, const std::string& and_then) const;

private:
    std::vector<double> gather_inputs(const std::map<std::string, double>& inputs) const;

    std::vector<Node> nodes_;
    std::vector<double> payload_;
    std::vector<std::uint32_t> input_nodes_;
    std::vector<std::string> input_names_;
    std::unordered_map<std::string, std::uint32_t> slot_by_name_;
    std::uint32_t output_ = 0;
    bool output_set_ = false;
};

// Expression sugar so tests and the network builder read naturally.
Expr operator+(Expr a, Expr b);
Expr operator-(Expr a, Expr b);
Expr operator*(Expr a, Expr b);
Expr operator/(Expr a, Expr b);
Expr operator+(Expr a, double c);
Expr operator+(double c, Expr a);
Expr operator-(Expr a, double c);
Expr operator-(double c, Expr a);
Expr operator*(Expr a, double c);
Expr operator*(double c, Expr a);
Expr operator/(Expr a, double c);
Expr operator/(double c, Expr a);
Expr operator-(Expr a);
Expr pow(Expr a, double c);
Expr exp(Expr a);
Expr log(Expr a);
Expr sin(Expr a);
Expr cos(Expr a);
Expr tanh(Expr a);

// ---------------------------------------------------------------------------

template <typename T>
const T& Tape::evaluate_into(std::span<const T> inputs, Workspace<T>& ws) const {
    if (!output_set_) throw ConfigError("tape has no output");
    if (inputs.size() != input_nodes_.size())
        throw UnboundVariableError("expected " + std::to_string(input_nodes_.size()) +
                                   " inputs, got " + std::to_string(inputs.size()));
    auto& v = ws.values;
    v.resize(nodes_.size());
    const std::size_t n = nodes_.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Node& nd = nodes_[i];
        switch (nd.op) {
            case OpKind::kInput: v[i] = inputs[nd.a]; break;
            case OpKind::kConst: v[i] = T(payload_[i]); break;
            case OpKind::kAdd: v[i] = v[nd.a] + v[nd.b]; break;
            case OpKind::kSub: v[i] = v[nd.a] - v[nd.b]; break;
            case OpKind::kMul: v[i] = v[nd.a] * v[nd.b]; break;
            case OpKind::kDiv: v[i] = v[nd.a] / v[nd.b]; break;
            case OpKind::kPow: v[i] = pow(v[nd.a], payload_[i]); break;
            case OpKind::kExp: v[i] = exp(v[nd.a]); break;
            case OpKind::kLog: v[i] = log(v[nd.a]); break;
            case OpKind::kSin: v[i] = sin(v[nd.a]); break;
            case OpKind::kCos: v[i] = cos(v[nd.a]); break;
            case OpKind::kTanh: v[i] = tanh(v[nd.a]); break;
        }
    }
    return v[output_];
}

template <typename T>
void Tape::reverse_into(Workspace<T>& ws) const {
    const auto& v = ws.values;
    auto& adj = ws.adjoints;
    adj.assign(nodes_.size(), T(0.0));
    adj[output_] = T(1.0);
    for (std::size_t ip = nodes_.size(); ip-- > 0;) {
        const Node& nd = nodes_[ip];
        const T g = adj[ip];
        switch (nd.op) {
            case OpKind::kInput:
            case OpKind::kConst:
                break;
            case OpKind::kAdd:
                adj[nd.a] = adj[nd.a] + g;
                adj[nd.b] = adj[nd.b] + g;
                break;
            case OpKind::kSub:
                adj[nd.a] = adj[nd.a] + g;
                adj[nd.b] = adj[nd.b] - g;
                break;
            case OpKind::kMul:
                adj[nd.a] = adj[nd.a] + g * v[nd.b];
                adj[nd.b] = adj[nd.b] + g * v[nd.a];
                break;
            case OpKind::kDiv: {
                adj[nd.a] = adj[nd.a] + g / v[nd.b];
                adj[nd.b] = adj[nd.b] - g * v[ip] / v[nd.b];
                break;
            }
            case OpKind::kPow:
                adj[nd.a] = adj[nd.a] + g * (payload_[ip] * pow(v[nd.a], payload_[ip] - 1.0));
                break;
            case OpKind::kExp:
                adj[nd.a] = adj[nd.a] + g * v[ip];
                break;
            case OpKind::kLog:
                adj[nd.a] = adj[nd.a] + g / v[nd.a];
                break;
            case OpKind::kSin:
                adj[nd.a] = adj[nd.a] + g * cos(v[nd.a]);
                break;
            case OpKind::kCos:
                adj[nd.a] = adj[nd.a] - g * sin(v[nd.a]);
                break;
            case OpKind::kTanh:
                adj[nd.a] = adj[nd.a] + g * (1.0 - v[ip] * v[ip]);
                break;
        }
    }
}

}  // namespace pinnhs
