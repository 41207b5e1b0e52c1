#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lamfab/alu.hpp"
#include "lamfab/graph.hpp"

namespace lamfab {

// Instruction keys are fixed; a depth value of 2 arriving on a shared-layout
// parent bus is indistinguishable from ReturnExpression, which is what the
// depth-alias readback collision reproduces.
enum class Opcode : uint8_t {
    None = 0,
    ActivateDepth = 1,
    ReturnExpression = 2,
    UpdateDepth = 3,
    AddBottomNode = 4,
    RemoveBottomNode = 5,
    Nullification = 6,
    UpdateExpression = 7,
    UpdateChildLeft = 8,
    UpdateChildRight = 9,
    CompareValue = 10,             // substitution broadcast, duplicating form
    DescendantTransformation = 11, // substitution broadcast, splicing form
    AncestorTransformation = 12,   // operand-side handover notice
    ImmediateResolution = 13,      // ask the ancestor application to splice itself out
};

const char* opcode_name(Opcode op);

struct InstructionFrame {
    Opcode opcode = Opcode::None;
    // Target id, or the depth argument of ActivateDepth/UpdateDepth.
    int operand = 0;
    // Out-of-band depth field; meaningful with the dedicated bus layout.
    int depth = -1;
};

struct ExpressionFrame {
    bool rsf = false;
    bool rdf = false;
    ExpKind kind = ExpKind::Free;
    bool sym = false;
    int payload = 0;
    uint16_t clp = 0;
    uint16_t crp = 0;
};

// Per-edge frames seen by one node in one tick: instruction/expression pairs
// from the parent, the left child and the right child.
struct EdgeInputs {
    InstructionFrame pib, cli, cri;
    ExpressionFrame peb, cle, cre;
};

struct EdgeOutputs {
    InstructionFrame pib, cli, cri;
    ExpressionFrame peb, cle, cre;
};

// The combinational forwarding behaviour of a node: lists pass frames
// between the parent and the side their activity selects while emitting
// their incremented depth upward, unfired operators gate their children,
// an irreducible comparison presents its own registers upward.
EdgeOutputs default_outputs(const NodeState& n, const EdgeInputs& in, int own_depth,
                            BusMode mode = BusMode::DedicatedDepth);

enum class Port : uint8_t { Down, Up };

struct Delivery {
    uint16_t to = 0;
    uint16_t from = 0; // 0 = cluster controller
    Port port = Port::Down;
    InstructionFrame ins;
    ExpressionFrame peb;
};

enum class RunStatus { Resolved, Suspended, Collision, BudgetExhausted };

const char* run_status_name(RunStatus s);

struct RunResult {
    TermPtr final_term;
    long ticks = 0;
    int peak_nodes = 0;
    RunStatus status = RunStatus::BudgetExhausted;
    std::vector<std::string> collision_log;
};

struct ClusterState {
    NodeGraph graph;
    AluState alu;
    long tick_count = 0;
    std::vector<Delivery> wires; // latched for the next tick
    std::vector<std::string> collision_log;
    std::vector<std::string> trace;
    int peak_nodes = 0;
    size_t run_faults = 0; // collision entries raised while ticking

    const ClusterConfig& cfg() const { return graph.cfg; }
};

ClusterState make_cluster(NodeGraph g);

// Queues a frame on the root's parent-side bus; it is dispatched on the next
// tick.
void inject(ClusterState& s, InstructionFrame ins, ExpressionFrame peb = {});

// One synchronous clock: every node first computes its effects from the
// latched previous state, then everything commits at once.
void tick(ClusterState& s);

// Same clock with an explicit node visit order; committed state does not
// depend on the order.
void tick_ordered(ClusterState& s, const std::vector<uint16_t>& order);

// True when the root's effective expression reports a raised resolve flag.
bool root_resolved(const ClusterState& s);

// Ticks until the root resolves, the state stops changing, a fault is
// logged, or the budget runs out. Injects the configured activation depth at
// tick zero.
RunResult run(ClusterState& s);

// Compile-and-run convenience.
RunResult run_term(const TermPtr& t, const ClusterConfig& cfg = {});

// Reconstructs the result the way a controller traversal would see it,
// following list activity and indirections. With the shared bus layout this
// also logs any depth signal that a non-list parent would decode as
// ReturnExpression.
TermPtr readback_live(ClusterState& s);

// Structural depth of a list node: zero at the bottom of a chain.
int list_depth(const NodeGraph& g, uint16_t cell);

} // namespace lamfab
