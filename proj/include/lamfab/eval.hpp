#pragma once

#include <optional>
#include <stdexcept>

#include "lamfab/term.hpp"

namespace lamfab {

// Which end of a list chain counts as depth zero. Structurally the innermost
// cell (the one whose tail is null) is depth zero; the alternative counts
// from the first written item instead.
enum class DepthOrigin { Innermost, Outermost };

struct EvalConfig {
    int value_width = 8;
    std::optional<int> activated_depth;
    DepthOrigin depth_origin = DepthOrigin::Innermost;
    long max_steps = 100000;
    // Only influences the spelling of fresh binder names; results are
    // alpha-equal across seeds.
    int fresh_seed = 0;
};

struct EvalResult {
    TermPtr normal_form;
    long steps = 0;
    // Set when an activation depth did not select a cell in some chain, so
    // the chain was left in place.
    bool suspended = false;
};

class EvalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Normal-order reduction: beta with capture-avoiding substitution, wrapped
// two's complement add/mult over numeric names, zero-comparisons that select
// a branch as soon as the applied value is numeric (without normalizing the
// branches first), and list chains that collapse to their activated item.
EvalResult reduce(TermPtr t, const EvalConfig& cfg = {});

// Rewrites non-negative numeric names into Church numerals and add/mult
// operators into the classic encodings; everything else is preserved.
// Comparisons, lists and negative values have no encoding and are rejected.
TermPtr church_expand(const TermPtr& t);

// Fabric cost of the expanded form.
int alt_node_count(const TermPtr& t);

bool alpha_equal(const TermPtr& x, const TermPtr& y);

} // namespace lamfab
