#include "pinnhs/tape.hpp"

#include <cmath>

namespace pinnhs {

Expr Tape::input(const std::string& name) {
    if (output_set_) throw ConfigError("cannot add inputs after the output is set");
    if (slot_by_name_.count(name)) throw ConfigError("duplicate input name: " + name);
    const auto slot = static_cast<std::uint32_t>(input_nodes_.size());
    const auto idx = static_cast<std::uint32_t>(nodes_.size());
    nodes_.push_back({OpKind::kInput, slot, 0});
    payload_.push_back(0.0);
    input_nodes_.push_back(idx);
    input_names_.push_back(name);
    slot_by_name_.emplace(name, slot);
    return {this, idx};
}

Expr Tape::constant(double value) { return emit(OpKind::kConst, 0, 0, value); }

Expr Tape::emit(OpKind op, std::uint32_t a, std::uint32_t b, double payload) {
    const auto idx = static_cast<std::uint32_t>(nodes_.size());
    if (op != OpKind::kInput && op != OpKind::kConst) {
        const bool binary = op == OpKind::kAdd || op == OpKind::kSub || op == OpKind::kMul ||
                            op == OpKind::kDiv;
        if (a >= idx || (binary && b >= idx)) {
            throw ConfigError("tape operand must precede its node");
        }
    }
    nodes_.push_back({op, a, b});
    payload_.push_back(payload);
    return {this, idx};
}

void Tape::set_output(Expr e) {
    if (e.tape != this) throw ConfigError("output expression belongs to another tape");
    output_ = e.index;
    output_set_ = true;
}

std::uint32_t Tape::slot_of(const std::string& name) const {
    auto it = slot_by_name_.find(name);
    if (it == slot_by_name_.end()) throw UnboundVariableError("unknown variable: " + name);
    return it->second;
}

std::vector<double> Tape::gather_inputs(const std::map<std::string, double>& inputs) const {
    std::vector<double> vals(input_nodes_.size());
    std::vector<bool> bound(input_nodes_.size(), false);
    for (const auto& [name, value] : inputs) {
        auto it = slot_by_name_.find(name);
        if (it == slot_by_name_.end()) throw UnboundVariableError("unknown variable: " + name);
        vals[it->second] = value;
        bound[it->second] = true;
    }
    for (std::size_t s = 0; s < bound.size(); ++s) {
        if (!bound[s]) throw UnboundVariableError("variable not bound: " + input_names_[s]);
    }
    return vals;
}

double Tape::evaluate(const std::map<std::string, double>& inputs) const {
    const auto vals = gather_inputs(inputs);
    Workspace<double> ws;
    evaluate_into<double>(vals, ws);
    for (std::size_t i = 0; i < ws.values.size(); ++i) {
        if (!std::isfinite(ws.values[i])) {
            throw NumericError("non-finite value at tape node " + std::to_string(i));
        }
    }
    return ws.values[output_];
}

std::map<std::string, double> Tape::gradient(const std::map<std::string, double>& inputs) const {
    const auto vals = gather_inputs(inputs);
    Workspace<double> ws;
    evaluate_into<double>(vals, ws);
    for (std::size_t i = 0; i < ws.values.size(); ++i) {
        if (!std::isfinite(ws.values[i])) {
            throw NumericError("non-finite value at tape node " + std::to_string(i));
        }
    }
    reverse_into(ws);
    std::map<std::string, double> out;
    for (std::size_t s = 0; s < input_nodes_.size(); ++s) {
        const double g = ws.adjoints[input_nodes_[s]];
        if (!std::isfinite(g)) {
            throw NumericError("non-finite adjoint for variable " + input_names_[s]);
        }
        out.emplace(input_names_[s], g);
    }
    return out;
}

double Tape::second_derivative(const std::map<std::string, double>& inputs,
                               const std::string& wrt, const std::string& and_then) const {
    const auto vals = gather_inputs(inputs);
    const std::uint32_t wrt_slot = slot_of(wrt);
    const std::uint32_t then_slot = slot_of(and_then);

    std::vector<Dual1> dual_inputs(vals.size());
    for (std::size_t s = 0; s < vals.size(); ++s) {
        dual_inputs[s] = Dual1(vals[s], s == wrt_slot ? 1.0 : 0.0);
    }
    Workspace<Dual1> ws;
    evaluate_into<Dual1>(dual_inputs, ws);
    for (std::size_t i = 0; i < ws.values.size(); ++i) {
        const Node& nd = nodes_[i];
        if (nd.op == OpKind::kPow) {
            const double c = payload_[i];
            if (c != std::floor(c) && ws.values[nd.a].primal <= 0.0) {
                throw NonDifferentiableError("pow with non-integer exponent at non-positive base, node " +
                                             std::to_string(i));
            }
        }
        if (nd.op == OpKind::kLog && ws.values[nd.a].primal <= 0.0) {
            throw NonDifferentiableError("log at non-positive argument, node " + std::to_string(i));
        }
        if (!std::isfinite(ws.values[i].primal) || !std::isfinite(ws.values[i].tangent)) {
            throw NumericError("non-finite value at tape node " + std::to_string(i));
        }
    }
    reverse_into(ws);
    return ws.adjoints[input_nodes_[then_slot]].tangent;
}

namespace {
Expr binary(OpKind op, Expr a, Expr b) {
    if (a.tape != b.tape) throw ConfigError("expressions belong to different tapes");
    return a.tape->emit(op, a.index, b.index);
}
Expr unary(OpKind op, Expr a, double payload = 0.0) {
    return a.tape->emit(op, a.index, 0, payload);
}
}  // namespace

Expr operator+(Expr a, Expr b) { return binary(OpKind::kAdd, a, b); }
Expr operator-(Expr a, Expr b) { return binary(OpKind::kSub, a, b); }
Expr operator*(Expr a, Expr b) { return binary(OpKind::kMul, a, b); }
Expr operator/(Expr a, Expr b) { return binary(OpKind::kDiv, a, b); }
Expr operator+(Expr a, double c) { return a + a.tape->constant(c); }
Expr operator+(double c, Expr a) { return a.tape->constant(c) + a; }
Expr operator-(Expr a, double c) { return a - a.tape->constant(c); }
Expr operator-(double c, Expr a) { return a.tape->constant(c) - a; }
Expr operator*(Expr a, double c) { return a * a.tape->constant(c); }
Expr operator*(double c, Expr a) { return a.tape->constant(c) * a; }
Expr operator/(Expr a, double c) { return a / a.tape->constant(c); }
Expr operator/(double c, Expr a) { return a.tape->constant(c) / a; }
Expr operator-(Expr a) { return a.tape->constant(-1.0) * a; }
Expr pow(Expr a, double c) { return unary(OpKind::kPow, a, c); }
Expr exp(Expr a) { return unary(OpKind::kExp, a); }
Expr log(Expr a) { return unary(OpKind::kLog, a); }
Expr sin(Expr a) { return unary(OpKind::kSin, a); }
Expr cos(Expr a) { return unary(OpKind::kCos, a); }
Expr tanh(Expr a) { return unary(OpKind::kTanh, a); }

}  // namespace pinnhs
