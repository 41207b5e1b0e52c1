#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "lamfab/eval.hpp"
#include "lamfab/term.hpp"

namespace lamfab {

// How a node identifies the opposite end of its parent-side bus. With a
// dedicated depth field, list depth travels out of band; in the shared
// layout the depth rides the instruction field of the parent-bound frame,
// which a non-list receiver decodes as an instruction key.
enum class BusMode { PaperFaithful, DedicatedDepth };

struct ClusterConfig {
    int nodes_per_cluster = 16;
    int id_width = 5;          // node ids; 0 is the null id, so 16 nodes need 5 bits
    int value_width = 8;       // two's complement payload width
    BusMode mode = BusMode::DedicatedDepth;
    int alu_queue_capacity = -1; // -1: defaults to nodes_per_cluster
    long max_ticks = 1000;
    // Comparisons go through the shared ALU by default; node-local
    // comparison hardware can be selected instead.
    bool local_compare = false;
    std::optional<int> activated_depth;
    DepthOrigin depth_origin = DepthOrigin::Innermost;
    bool trace = false;

    int queue_capacity() const { return alu_queue_capacity < 0 ? nodes_per_cluster : alu_queue_capacity; }
    void validate() const;
};

enum class ExpKind : uint8_t {
    Free = 0,
    Name,
    Function,
    Application,
    List,
    Add,
    Mult,
    GreatZero,
    LessZero,
    EqualZero,
    GoTo,
};

const char* exp_kind_name(ExpKind k);
bool is_arith_kind(ExpKind k);
bool is_compare_kind(ExpKind k);

// What a node is currently waiting on, if anything.
enum class PendingOp : uint8_t { None = 0, AluWait, AddBottom, RemoveBottom, Beta };

struct NodeState {
    uint16_t uni = 0; // own id; position in the node table
    ExpKind kind = ExpKind::Free;
    bool sym = false;  // Name payload is a symbol id rather than a value
    int payload = 0;
    uint16_t clp = 0; // left child (binder / operator / item / left operand / target)
    uint16_t crp = 0; // right child (body / operand / tail / right operand)
    uint16_t pnt = 0; // parent-side connection; 0 at the root
    bool rsf = false; // resolve flag; doubles as list activity
    bool rdf = false; // irreducible flag: the branch depends on a missing ancestor
    uint8_t phase = 0;          // progress of a multi-cycle operation
    PendingOp pending = PendingOp::None;
    uint16_t copy_src = 0;      // nonzero while duplicating another subtree
    // Stashed expression data for a deferred write (second cycle of a
    // bottom-node insertion).
    ExpKind st_kind = ExpKind::Free;
    bool st_sym = false;
    int st_payload = 0;
    uint16_t st_clp = 0, st_crp = 0;
    // Substitution bookkeeping on the coordinating application node.
    int beta_sym = -1;
    uint16_t beta_arg = 0;
    bool beta_copy = false;
    bool beta_discard = false;

    void clear() { *this = NodeState{}; }
};

class GraphError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct NodeGraph {
    ClusterConfig cfg;
    std::vector<NodeState> nodes; // index 0 unused
    uint16_t root = 0;
    std::vector<std::string> symbols;
    std::unordered_map<std::string, int> symbol_ids;

    explicit NodeGraph(ClusterConfig cfg = {});

    // Lowest free id first; throws GraphError when the cluster is full.
    uint16_t allocate();
    void free_node(uint16_t uni);
    bool live(uint16_t uni) const;
    int live_count() const;
    NodeState& at(uint16_t uni);
    const NodeState& at(uint16_t uni) const;
    int symbol_id(const std::string& label);
    const std::string& symbol_name(int id) const;
};

// Lays a term out as fabric nodes, ids assigned in preorder starting at 1.
// Name leaves start resolved; list cells start inactive; comparisons with no
// ancestor-side application are marked irreducible.
NodeGraph compile(const TermPtr& t, const ClusterConfig& cfg = {});

// Pointer-walk reconstruction of the stored graph; indirection nodes are
// chased. Dangling children and cycles are errors.
TermPtr readback_static(const NodeGraph& g);
TermPtr readback_static(const NodeGraph& g, uint16_t from);

// One line per allocated node: `uni kind payload clp crp rsf rdf`.
std::string dump(const NodeGraph& g);

} // namespace lamfab
