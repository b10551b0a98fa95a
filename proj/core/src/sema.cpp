#include "farfel/sema.hpp"

#include <optional>
#include <set>

namespace farfel {

namespace {

[[noreturn]] void fail(SrcLoc loc, std::string msg) {
    throw SemaError(Diagnostic{Phase::Sema, loc, std::move(msg)});
}

std::string_view ad_kw(AdMode m) { return m == AdMode::Forward ? "TANGENT" : "COTANGENT"; }

class Resolver {
public:
    BoundProgram run(Program prog) {
        bound_.program = std::move(prog);
        bound_.node_bindings.resize(bound_.program.node_count);

        // Root pseudo-frame: one closure slot per top-level unit.
        scopes_.push_back(Scope{nullptr, &bound_.root, {}});
        for (auto& u : bound_.program.units) {
            if (u->kind == SubKind::Program) {
                if (bound_.main) fail(u->loc, "multiple PROGRAM units in one file");
                bound_.main = u.get();
            }
            declare_def(u.get());
        }
        for (auto& u : bound_.program.units) process_unit(u.get());
        scopes_.pop_back();
        return std::move(bound_);
    }

private:
    struct Scope {
        const Subprogram* sub; // null for the root pseudo-frame
        SubInfo* info;
        std::map<std::string, Binding> names;
    };

    BoundProgram bound_;
    std::vector<Scope> scopes_;

    Scope& scope() { return scopes_.back(); }

    void bind_node(NodeId id, const Binding& b) { bound_.node_bindings[id] = b; }

    int new_slot(SubInfo& info, const std::string& name, bool is_array, bool variable) {
        int s = info.nslots++;
        info.slot_names.push_back(name);
        info.slot_is_array.push_back(is_array);
        if (variable && !is_array) info.scalar_slots[name] = s;
        return s;
    }

    void declare_def(const Subprogram* sub) {
        Scope& sc = scope();
        if (sc.names.count(sub->name))
            fail(sub->loc, "duplicate definition of " + sub->name + " in the same scope");
        Binding b;
        b.kind = BindKind::Subprogram;
        b.slot = new_slot(*sc.info, sub->name, false, false);
        b.sub = sub;
        b.decl = sub->loc;
        sc.names[sub->name] = b;
        sc.info->defs.push_back({b.slot, sub});
    }

    // Walks the scope stack innermost first; rewrites the binding so kind
    // and depth are relative to the current frame.
    std::optional<Binding> lookup(const std::string& name) {
        for (size_t j = scopes_.size(); j-- > 0;) {
            auto it = scopes_[j].names.find(name);
            if (it == scopes_[j].names.end()) continue;
            Binding b = it->second;
            b.depth = static_cast<int>(scopes_.size() - 1 - j);
            if (b.depth > 0 && (b.kind == BindKind::Local || b.kind == BindKind::Param))
                b.kind = BindKind::Captured;
            return b;
        }
        return std::nullopt;
    }

    // ---- per-unit processing ----

    void process_unit(const Subprogram* sub) {
        SubInfo& si = bound_.subs[sub];
        si.sub = sub;
        scopes_.push_back(Scope{sub, &si, {}});
        Scope& sc = scope();

        for (const auto& p : sub->params) {
            if (sc.names.count(p)) fail(sub->loc, "duplicate parameter " + p);
            Binding b;
            b.kind = BindKind::Param;
            b.slot = new_slot(si, p, false, true);
            b.decl = sub->loc;
            sc.names[p] = b;
        }
        if (sub->kind == SubKind::Function) {
            if (sc.names.count(sub->name))
                fail(sub->loc, sub->name + " is both a parameter and the function name");
            Binding b;
            b.kind = BindKind::Local;
            b.slot = new_slot(si, sub->name, false, true);
            b.decl = sub->loc;
            si.result_slot = b.slot;
            sc.names[sub->name] = b;
        }

        for (const auto& d : sub->dims) {
            auto hit = sc.names.find(d.name);
            if (hit != sc.names.end()) {
                // A dimensioned parameter: the caller passes the array.
                if (hit->second.kind != BindKind::Param)
                    fail(d.loc, "DIMENSION " + d.name + " conflicts with an earlier declaration");
                if (hit->second.is_array) fail(d.loc, d.name + " is dimensioned twice");
                hit->second.is_array = true;
                si.slot_is_array[hit->second.slot] = true;
                si.scalar_slots.erase(d.name);
            } else {
                Binding b;
                b.kind = BindKind::Local;
                b.is_array = true;
                b.slot = new_slot(si, d.name, true, false);
                b.decl = d.loc;
                sc.names[d.name] = b;
                si.arrays.push_back({b.slot, d.extent.get()});
            }
            bind_node(d.id, sc.names[d.name]);
        }

        // Hoist nested definitions: calls may precede them textually.
        for (const auto& st : sub->body)
            if (auto* def = std::get_if<SubDefStmt>(&st.node)) declare_def(def->sub.get());

        collect_locals(sub->body);

        for (const auto& d : sub->dims) resolve_expr(*d.extent);
        resolve_body(sub->body);

        for (const auto& st : sub->body)
            if (auto* def = std::get_if<SubDefStmt>(&st.node)) {
                // scope() is re-fetched: the recursion below grows scopes_,
                // which can move the vector out from under a held reference.
                bind_node(st.id, scope().names.at(def->sub->name));
                process_unit(def->sub.get());
            }
        scopes_.pop_back();
    }

    // Names assigned anywhere in this unit (outside nested definitions)
    // that resolve to no existing binding become locals of this unit.
    void collect_locals(const std::vector<Stmt>& body) {
        for (const auto& st : body) {
            std::visit(
                [&](const auto& x) {
                    using T = std::decay_t<decltype(x)>;
                    if constexpr (std::is_same_v<T, AssignStmt>) {
                        maybe_local(x.target);
                    } else if constexpr (std::is_same_v<T, IfStmt>) {
                        collect_locals(x.then_body);
                        collect_locals(x.else_body);
                    } else if constexpr (std::is_same_v<T, DoStmt>) {
                        maybe_local_name(x.var, st.loc);
                        collect_locals(x.body);
                    } else if constexpr (std::is_same_v<T, AdBlockStmt>) {
                        for (const auto& spec : x.block.open)
                            if (spec.has_loop) maybe_local_name(spec.loop_var, spec.loc);
                        for (const auto& spec : x.block.close) {
                            for (const auto& b : spec.bindings) maybe_local(b.out);
                            if (spec.has_loop) maybe_local_name(spec.loop_var, spec.loc);
                        }
                        collect_locals(x.block.body);
                    }
                },
                st.node);
        }
    }

    void maybe_local(const LValue& lv) {
        if (lv.index) return; // element write into a declared array
        maybe_local_name(lv.name, lv.loc);
    }

    void maybe_local_name(const std::string& name, SrcLoc loc) {
        if (lookup(name)) return; // assignment writes the existing binding
        Binding b;
        b.kind = BindKind::Local;
        b.slot = new_slot(*scope().info, name, false, true);
        b.decl = loc;
        scope().names[name] = b;
    }

    // ---- resolution ----

    void resolve_body(const std::vector<Stmt>& body) {
        for (const auto& st : body) {
            std::visit(
                [&](const auto& x) {
                    using T = std::decay_t<decltype(x)>;
                    if constexpr (std::is_same_v<T, AssignStmt>) {
                        resolve_lvalue(x.target, true);
                        resolve_expr(*x.value);
                    } else if constexpr (std::is_same_v<T, CallStmt>) {
                        bind_node(st.id, resolve_callee(x.callee, st.loc));
                        for (const auto& a : x.args) resolve_expr(*a);
                    } else if constexpr (std::is_same_v<T, IfStmt>) {
                        resolve_expr(*x.lhs);
                        resolve_expr(*x.rhs);
                        resolve_body(x.then_body);
                        resolve_body(x.else_body);
                    } else if constexpr (std::is_same_v<T, DoStmt>) {
                        resolve_loop_var(x.var, x.var_id, st.loc);
                        resolve_expr(*x.lo);
                        resolve_expr(*x.hi);
                        if (x.step) resolve_expr(*x.step);
                        resolve_body(x.body);
                    } else if constexpr (std::is_same_v<T, PrintStmt>) {
                        for (const auto& v : x.values) resolve_expr(*v);
                    } else if constexpr (std::is_same_v<T, AdBlockStmt>) {
                        resolve_ad_block(x.block);
                    }
                    // ReturnStmt: nothing. SubDefStmt: processed by the
                    // caller. AdMisuseStmt: reported by validate_ad_blocks,
                    // never executed, so its operands stay unresolved.
                },
                st.node);
        }
    }

    void resolve_ad_block(const AdBlock& blk) {
        for (const auto& spec : blk.open) {
            for (const auto& b : spec.bindings) {
                resolve_lvalue(b.ad_ref, false);
                resolve_expr(*b.seed);
            }
            resolve_spec_loop(spec);
        }
        resolve_body(blk.body);
        for (const auto& spec : blk.close) {
            for (const auto& b : spec.bindings) {
                resolve_lvalue(b.out, true);
                resolve_lvalue(b.ad_ref, false);
            }
            resolve_spec_loop(spec);
        }
    }

    void resolve_spec_loop(const AdSpec& spec) {
        if (!spec.has_loop) return;
        resolve_loop_var(spec.loop_var, spec.loop_var_id, spec.loc);
        resolve_expr(*spec.lo);
        resolve_expr(*spec.hi);
    }

    void resolve_loop_var(const std::string& name, NodeId id, SrcLoc loc) {
        auto b = lookup(name);
        if (!b) fail(loc, name + " is not defined"); // collect_locals created it
        if (b->kind == BindKind::Subprogram) fail(loc, "cannot assign to subprogram " + name);
        if (b->is_array) fail(loc, "loop variable " + name + " is an array");
        bind_node(id, *b);
    }

    void resolve_lvalue(const LValue& lv, bool for_write) {
        auto b = lookup(lv.name);
        if (!b) fail(lv.loc, unresolved_message(lv.name));
        if (b->kind == BindKind::Subprogram) {
            if (for_write) fail(lv.loc, "cannot assign to subprogram " + lv.name);
            fail(lv.loc, lv.name + " names a subprogram, not a variable");
        }
        if (lv.index) {
            if (!b->is_array) fail(lv.loc, lv.name + " is not an array");
            resolve_expr(*lv.index);
        } else if (b->is_array) {
            fail(lv.loc, for_write ? "array " + lv.name + " cannot be assigned without an index"
                                   : "array " + lv.name + " needs an index here");
        }
        bind_node(lv.id, *b);
    }

    Binding resolve_callee(const std::string& name, SrcLoc loc) {
        for (size_t j = scopes_.size(); j-- > 0;) {
            auto it = scopes_[j].names.find(name);
            if (it == scopes_[j].names.end()) continue;
            // Recursion: inside FUNCTION F, the callee F is the enclosing
            // definition, not the result variable.
            if (scopes_[j].sub && name == scopes_[j].sub->name &&
                it->second.slot == scopes_[j].info->result_slot)
                continue;
            Binding b = it->second;
            b.depth = static_cast<int>(scopes_.size() - 1 - j);
            if (b.depth > 0 && (b.kind == BindKind::Local || b.kind == BindKind::Param))
                b.kind = BindKind::Captured;
            if (b.is_array) fail(loc, "array " + name + " is not callable");
            return b;
        }
        int f = intrinsic_id(name);
        if (f >= 0) {
            Binding b;
            b.kind = BindKind::Intrinsic;
            b.intrinsic = static_cast<Intrinsic>(f);
            return b;
        }
        fail(loc, unresolved_message(name));
    }

    void resolve_expr(const Expr& e) {
        std::visit(
            [&](const auto& x) {
                using T = std::decay_t<decltype(x)>;
                if constexpr (std::is_same_v<T, VarRef>) {
                    if (auto b = lookup(x.name)) {
                        bind_node(e.id, *b);
                        return;
                    }
                    int f = intrinsic_id(x.name);
                    if (f >= 0) {
                        Binding b;
                        b.kind = BindKind::Intrinsic;
                        b.intrinsic = static_cast<Intrinsic>(f);
                        bind_node(e.id, b);
                        return;
                    }
                    // In the PROGRAM unit a never-assigned scalar becomes a
                    // local so a runtime override can supply it; reading it
                    // without one is a runtime error, not a sema error.
                    if (scope().sub && scope().sub->kind == SubKind::Program) {
                        Binding b;
                        b.kind = BindKind::Local;
                        b.slot = new_slot(*scope().info, x.name, false, true);
                        b.decl = e.loc;
                        scope().names[x.name] = b;
                        bind_node(e.id, b);
                        return;
                    }
                    fail(e.loc, unresolved_message(x.name));
                } else if constexpr (std::is_same_v<T, ArrayRef>) {
                    auto b = lookup(x.name);
                    if (!b) fail(e.loc, unresolved_message(x.name));
                    if (!b->is_array) fail(e.loc, x.name + " is not an array");
                    bind_node(e.id, *b);
                    resolve_expr(*x.index);
                } else if constexpr (std::is_same_v<T, Neg>) {
                    resolve_expr(*x.operand);
                } else if constexpr (std::is_same_v<T, Binary>) {
                    resolve_expr(*x.lhs);
                    resolve_expr(*x.rhs);
                } else if constexpr (std::is_same_v<T, CallExpr>) {
                    bind_node(e.id, resolve_callee(x.callee, e.loc));
                    for (const auto& a : x.args) resolve_expr(*a);
                }
                // IntLit, RealLit: nothing. AdReadExpr: validate_ad_blocks
                // reports it; resolving would only cascade errors.
            },
            e.node);
    }

    static std::string unresolved_message(const std::string& name) {
        return name + " is not defined: no parameter, outer variable, subprogram, or intrinsic has "
                      "that name";
    }
};

// ---- AD-block validation ----

template <typename F>
void walk_expr(const Expr& e, const F& f) {
    f(e);
    std::visit(
        [&](const auto& x) {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, ArrayRef>) {
                walk_expr(*x.index, f);
            } else if constexpr (std::is_same_v<T, Neg>) {
                walk_expr(*x.operand, f);
            } else if constexpr (std::is_same_v<T, Binary>) {
                walk_expr(*x.lhs, f);
                walk_expr(*x.rhs, f);
            } else if constexpr (std::is_same_v<T, CallExpr>) {
                for (const auto& a : x.args) walk_expr(*a, f);
            } else if constexpr (std::is_same_v<T, AdReadExpr>) {
                if (x.index) walk_expr(*x.index, f);
            }
        },
        e.node);
}

void expr_names(const Expr& e, std::set<std::string>& out) {
    walk_expr(e, [&](const Expr& n) {
        std::visit(
            [&](const auto& x) {
                using T = std::decay_t<decltype(x)>;
                if constexpr (std::is_same_v<T, VarRef> || std::is_same_v<T, ArrayRef> ||
                              std::is_same_v<T, AdReadExpr>) {
                    out.insert(x.name);
                } else if constexpr (std::is_same_v<T, CallExpr>) {
                    out.insert(x.callee);
                }
            },
            n.node);
    });
}

// Every name that occurs in the block body or its opening specs; closing
// specs may only read derivatives of these.
void occurring_names(const std::vector<Stmt>& body, std::set<std::string>& out);

void lvalue_names(const LValue& lv, std::set<std::string>& out) {
    out.insert(lv.name);
    if (lv.index) expr_names(*lv.index, out);
}

void occurring_names(const std::vector<Stmt>& body, std::set<std::string>& out) {
    for (const auto& st : body) {
        std::visit(
            [&](const auto& x) {
                using T = std::decay_t<decltype(x)>;
                if constexpr (std::is_same_v<T, AssignStmt>) {
                    lvalue_names(x.target, out);
                    expr_names(*x.value, out);
                } else if constexpr (std::is_same_v<T, CallStmt>) {
                    out.insert(x.callee);
                    for (const auto& a : x.args) expr_names(*a, out);
                } else if constexpr (std::is_same_v<T, IfStmt>) {
                    expr_names(*x.lhs, out);
                    expr_names(*x.rhs, out);
                    occurring_names(x.then_body, out);
                    occurring_names(x.else_body, out);
                } else if constexpr (std::is_same_v<T, DoStmt>) {
                    out.insert(x.var);
                    expr_names(*x.lo, out);
                    expr_names(*x.hi, out);
                    if (x.step) expr_names(*x.step, out);
                    occurring_names(x.body, out);
                } else if constexpr (std::is_same_v<T, PrintStmt>) {
                    for (const auto& v : x.values) expr_names(*v, out);
                } else if constexpr (std::is_same_v<T, AdBlockStmt>) {
                    for (const auto& spec : x.block.open)
                        for (const auto& b : spec.bindings) {
                            lvalue_names(b.ad_ref, out);
                            expr_names(*b.seed, out);
                        }
                    occurring_names(x.block.body, out);
                    for (const auto& spec : x.block.close)
                        for (const auto& b : spec.bindings) {
                            lvalue_names(b.out, out);
                            lvalue_names(b.ad_ref, out);
                        }
                } else if constexpr (std::is_same_v<T, SubDefStmt>) {
                    out.insert(x.sub->name);
                }
            },
            st.node);
    }
}

class Validator {
public:
    std::vector<Diagnostic> run(const BoundProgram& bound) {
        for (const auto& u : bound.program.units) check_unit(*u);
        return std::move(diags_);
    }

private:
    std::vector<Diagnostic> diags_;

    void report(SrcLoc loc, std::string msg) {
        diags_.push_back(Diagnostic{Phase::Sema, loc, std::move(msg)});
    }

    void check_unit(const Subprogram& sub) { check_body(sub.body); }

    void check_expr_tree(const Expr& e) {
        walk_expr(e, [&](const Expr& n) {
            if (auto* r = std::get_if<AdReadExpr>(&n.node))
                report(n.loc, std::string(ad_kw(r->mode)) + "(" + r->name +
                                  ") is only meaningful in the spec lists of an AD block");
        });
    }

    void check_body(const std::vector<Stmt>& body) {
        for (const auto& st : body) {
            std::visit(
                [&](const auto& x) {
                    using T = std::decay_t<decltype(x)>;
                    if constexpr (std::is_same_v<T, AssignStmt>) {
                        if (x.target.index) check_expr_tree(*x.target.index);
                        check_expr_tree(*x.value);
                    } else if constexpr (std::is_same_v<T, CallStmt>) {
                        for (const auto& a : x.args) check_expr_tree(*a);
                    } else if constexpr (std::is_same_v<T, IfStmt>) {
                        check_expr_tree(*x.lhs);
                        check_expr_tree(*x.rhs);
                        check_body(x.then_body);
                        check_body(x.else_body);
                    } else if constexpr (std::is_same_v<T, DoStmt>) {
                        check_expr_tree(*x.lo);
                        check_expr_tree(*x.hi);
                        if (x.step) check_expr_tree(*x.step);
                        check_body(x.body);
                    } else if constexpr (std::is_same_v<T, PrintStmt>) {
                        for (const auto& v : x.values) check_expr_tree(*v);
                    } else if constexpr (std::is_same_v<T, SubDefStmt>) {
                        check_unit(*x.sub);
                    } else if constexpr (std::is_same_v<T, AdBlockStmt>) {
                        check_ad_block(x.block);
                    } else if constexpr (std::is_same_v<T, AdMisuseStmt>) {
                        report(st.loc, std::string(ad_kw(x.mode)) + "(" + x.target.name +
                                           ") = ... seeds a derivative and belongs in an AD "
                                           "block's opening spec list");
                    }
                },
                st.node);
        }
    }

    void check_ad_block(const AdBlock& blk) {
        const char* block_name = blk.mode == AdMode::Forward ? "a forward (ADF)" : "a reverse (ADR)";
        auto check_specs = [&](const std::vector<AdSpec>& specs) {
            for (const auto& spec : specs) {
                for (const auto& b : spec.bindings) {
                    if (b.kw_mode != blk.mode)
                        report(b.ad_ref.loc, std::string(ad_kw(b.kw_mode)) + " spec in " +
                                                 block_name + " block");
                    if (b.seed) check_expr_tree(*b.seed);
                }
                if (spec.has_loop) {
                    std::set<std::string> bound_names;
                    expr_names(*spec.lo, bound_names);
                    expr_names(*spec.hi, bound_names);
                    if (bound_names.count(spec.loop_var))
                        report(spec.loc, "implied-do variable " + spec.loop_var +
                                             " shadows the " + spec.loop_var +
                                             " used in its own bounds");
                    check_expr_tree(*spec.lo);
                    check_expr_tree(*spec.hi);
                }
            }
        };

        check_specs(blk.open);
        check_specs(blk.close);
        check_body(blk.body);

        // Closing specs may only harvest derivatives of names the block saw.
        std::set<std::string> seen;
        for (const auto& spec : blk.open)
            for (const auto& b : spec.bindings) {
                lvalue_names(b.ad_ref, seen);
                expr_names(*b.seed, seen);
            }
        occurring_names(blk.body, seen);
        for (const auto& spec : blk.close)
            for (const auto& b : spec.bindings)
                if (!seen.count(b.ad_ref.name))
                    report(b.ad_ref.loc,
                           std::string(ad_kw(b.kw_mode)) + "(" + b.ad_ref.name + ") read in the closing specs, but " +
                               b.ad_ref.name + " does not occur in the " +
                               (blk.mode == AdMode::Forward ? "ADF" : "ADR") + " block opened at line " +
                               std::to_string(blk.loc.line));
    }
};

} // namespace

BoundProgram resolve_scopes(Program program) {
    Resolver r;
    return r.run(std::move(program));
}

std::vector<Diagnostic> validate_ad_blocks(const BoundProgram& bound) {
    Validator v;
    return v.run(bound);
}

} // namespace farfel
