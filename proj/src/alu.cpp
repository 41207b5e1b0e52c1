#include "lamfab/alu.hpp"

#include "lamfab/term.hpp"

namespace lamfab {

AluComputed alu_compute(AluOp op, int a, int b, int width) {
    switch (op) {
        case AluOp::Add:
            return {wrap_value(static_cast<long long>(a) + b, width), false};
        case AluOp::Mult:
            return {wrap_value(static_cast<long long>(a) * b, width), false};
        case AluOp::CmpGT0:
            return {0, a > 0};
        case AluOp::CmpLT0:
            return {0, a < 0};
        case AluOp::CmpEQ0:
            return {0, a == 0};
    }
    return {};
}

const char* alu_op_name(AluOp op) {
    switch (op) {
        case AluOp::Add: return "Add";
        case AluOp::Mult: return "Mult";
        case AluOp::CmpGT0: return "CmpGT0";
        case AluOp::CmpLT0: return "CmpLT0";
        case AluOp::CmpEQ0: return "CmpEQ0";
    }
    return "?";
}

bool AluState::request(const AluRequest& r) {
    ++arrivals_this_tick;
    if (static_cast<int>(stack.size()) >= capacity) return false;
    stack.push_back(r);
    return true;
}

std::optional<AluResult> AluState::alu_tick() {
    result_out.reset();
    const bool deferred = arrivals_this_tick > 0;
    arrivals_this_tick = 0;
    if (deferred || stack.empty()) {
        busy = false;
        return std::nullopt;
    }
    const AluRequest r = stack.back();
    stack.pop_back();
    busy = true;
    const AluComputed c = alu_compute(r.op, r.a, r.b, width);
    result_out = AluResult{r.uni, c.value, c.truth, r.op};
    return result_out;
}

} // namespace lamfab
