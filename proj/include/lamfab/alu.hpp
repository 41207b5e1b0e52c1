#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace lamfab {

enum class AluOp : uint8_t { Add, Mult, CmpGT0, CmpLT0, CmpEQ0 };

struct AluRequest {
    uint16_t uni = 0; // requesting node; results are addressed by this id
    int a = 0;
    int b = 0;
    AluOp op = AluOp::Add;
};

struct AluResult {
    uint16_t uni = 0;
    int value = 0;
    bool truth = false;
    AluOp op = AluOp::Add;
};

struct AluComputed {
    int value = 0;
    bool truth = false;
};

// Wrapped two's complement arithmetic / zero-comparisons at the given width.
AluComputed alu_compute(AluOp op, int a, int b, int width);

const char* alu_op_name(AluOp op);

// A last-in-first-out request stack: pushes land on top, and the unit only
// services the stack on ticks with no incoming push, so a continuous stream
// of requests starves older entries.
struct AluState {
    int capacity = 16;
    int width = 8;
    std::vector<AluRequest> stack; // back is the top
    bool busy = false;
    std::optional<AluResult> result_out; // valid for one tick
    int arrivals_this_tick = 0;

    // False when the stack is full (the request is dropped).
    bool request(const AluRequest& r);

    // One clock: clears the previous result, then either defers (a request
    // arrived this tick) or pops and computes the top entry.
    std::optional<AluResult> alu_tick();

    bool idle() const { return stack.empty() && !result_out && arrivals_this_tick == 0; }
};

} // namespace lamfab
