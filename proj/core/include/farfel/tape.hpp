#pragma once

#include <string>
#include <vector>

#include "farfel/value.hpp"

namespace farfel {

// One recorded operation. Partials are Values: under nested AD blocks
// they carry lower-tag layers, which makes the reverse sweep itself
// differentiable by the enclosing blocks.
struct TapeNode {
    const char* op = "leaf"; // static label: "leaf", "+", "SQRT", ...
    int n_in = 0;
    std::uint32_t in[2] = {0, 0};
    Value partial[2];
    Value primal;
    Value adjoint; // unset until seeded; unset counts as zero
};

// Wengert list for one ADR activation.
class Tape {
public:
    explicit Tape(Tag t) : tag_(t) {}
    Tag tag() const { return tag_; }

    std::uint32_t leaf(Value primal) {
        TapeNode n;
        n.primal = std::move(primal);
        nodes_.push_back(std::move(n));
        return static_cast<std::uint32_t>(nodes_.size() - 1);
    }

    std::uint32_t record1(const char* op, std::uint32_t a, Value da, Value primal) {
        TapeNode n;
        n.op = op;
        n.n_in = 1;
        n.in[0] = a;
        n.partial[0] = std::move(da);
        n.primal = std::move(primal);
        nodes_.push_back(std::move(n));
        return static_cast<std::uint32_t>(nodes_.size() - 1);
    }

    std::uint32_t record2(const char* op, std::uint32_t a, Value da, std::uint32_t b, Value db,
                          Value primal) {
        TapeNode n;
        n.op = op;
        n.n_in = 2;
        n.in[0] = a;
        n.in[1] = b;
        n.partial[0] = std::move(da);
        n.partial[1] = std::move(db);
        n.primal = std::move(primal);
        nodes_.push_back(std::move(n));
        return static_cast<std::uint32_t>(nodes_.size() - 1);
    }

    std::size_t size() const { return nodes_.size(); }
    TapeNode& node(std::uint32_t i) { return nodes_[i]; }
    const TapeNode& node(std::uint32_t i) const { return nodes_[i]; }

    // Human-readable listing, one node per line.
    std::string dump() const;

private:
    Tag tag_;
    std::vector<TapeNode> nodes_;
};

} // namespace farfel
