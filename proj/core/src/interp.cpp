#include "farfel/interp.hpp"

#include <chrono>
#include <unordered_map>
#include <unordered_set>
#include <utility>

#include "farfel/printer.hpp"

namespace farfel {

namespace {

[[noreturn]] void rt(SrcLoc loc, std::string msg) {
    throw RuntimeError(Diagnostic{Phase::Runtime, loc, std::move(msg)});
}

std::string strip_spaces(const std::string& s) {
    std::string r;
    r.reserve(s.size());
    for (char c : s)
        if (c != ' ') r += c;
    return r;
}

// A storage cell plus whatever keeps it alive (its frame or array).
struct CellRef {
    Value* cell;
    std::shared_ptr<void> owner;
};

struct ACell {
    Value* cell;
    std::shared_ptr<void> owner;
    long long index;
};

enum class Flow { Normal, Returned };

class Context {
public:
    Context(const BoundProgram& b, Engine& e, const RunOptions& o)
        : bound_(b), eng_(e), opts_(o), start_(std::chrono::steady_clock::now()) {}

    void run() {
        auto root = std::make_shared<Frame>();
        root->slots.resize(bound_.root.nslots);
        for (const auto& d : bound_.root.defs) {
            Closure c;
            c.sub = d.sub;
            c.frame = root;
            root->slots[d.slot].v = std::move(c);
        }
        const Subprogram* main = bound_.main;
        const SubInfo& mi = bound_.info(main);
        auto frame = std::make_shared<Frame>();
        frame->sub = main;
        frame->parent = root;
        frame->slots.resize(mi.nslots);
        hoist_defs(frame, mi);
        for (const auto& [name, val] : opts_.overrides) {
            auto it = mi.scalar_slots.find(name);
            if (it == mi.scalar_slots.end())
                rt(main->loc, "--set " + name + ": the PROGRAM unit has no scalar of that name");
            frame->slots[it->second] = val;
            pinned_.insert(&frame->slots[it->second]);
        }
        alloc_arrays(frame, mi);
        exec_body(main->body, frame);
    }

private:
    struct Activation {
        AdMode mode;
        Tag tag;
        std::shared_ptr<Tape> tape;
        // Cells written while the block is active, stripped of its tag
        // on exit and handed to the enclosing activation.
        std::unordered_map<Value*, std::shared_ptr<void>> touched;
        // First-read leaf per cell, for the closing COTANGENT harvest.
        std::unordered_map<Value*, std::uint32_t> leaves;
    };

    // ---- frames ----

    static std::shared_ptr<Frame> frame_at(const std::shared_ptr<Frame>& fr, int depth) {
        auto f = fr;
        for (int i = 0; i < depth; ++i) f = f->parent;
        return f;
    }

    void hoist_defs(const std::shared_ptr<Frame>& frame, const SubInfo& si) {
        for (const auto& d : si.defs) {
            Closure c;
            c.sub = d.sub;
            c.frame = frame;
            frame->slots[d.slot].v = std::move(c);
        }
    }

    void alloc_arrays(const std::shared_ptr<Frame>& frame, const SubInfo& si) {
        for (const auto& a : si.arrays) {
            Value n = eval(*a.extent, frame);
            if (!n.is_int()) rt(a.extent->loc, "array extent must be an integer");
            long long len = n.as_int();
            if (len < 1) rt(a.extent->loc, "array extent must be at least 1");
            auto arr = std::make_shared<ArrayObj>();
            arr->cells.resize(static_cast<std::size_t>(len));
            frame->slots[a.slot].v = std::move(arr);
        }
    }

    // ---- cells ----

    void touch(Value* cell, std::shared_ptr<void> owner) {
        if (!ad_stack_.empty()) ad_stack_.back().touched.emplace(cell, std::move(owner));
    }

    // Raw write: seeds and other engine-driven writes that must land even
    // on pinned cells.
    void write_cell(const CellRef& c, Value v) {
        *c.cell = std::move(v);
        touch(c.cell, c.owner);
    }

    // Program assignment: respects --set pinning.
    void store(const CellRef& c, Value v) {
        if (pinned_.count(c.cell)) return;
        write_cell(c, std::move(v));
    }

    Value load(Value* cell, const std::shared_ptr<void>& owner, SrcLoc loc,
               const std::string& what) {
        if (cell->unset()) rt(loc, what + " used before it was set");
        Value v = *cell;
        if (v.is_real() || v.is_dual() || v.is_tracer()) {
            // First read under an active ADR tape turns the value into a
            // tape leaf, written back so later reads share the node.
            // Integers stay plain: loop counters are not inputs.
            for (auto& act : ad_stack_) {
                if (act.mode != AdMode::Reverse) continue;
                if (act.tag <= top_tag(v)) continue;
                if (act.leaves.count(cell)) continue;
                v = eng_.make_leaf(act.tag, std::move(v));
                act.leaves.emplace(cell, v.tracer()->node);
                *cell = v;
                act.touched.emplace(cell, owner);
            }
        }
        return v;
    }

    ACell array_cell(const Binding& b, const Expr& idx, const std::string& name, SrcLoc loc,
                     const std::shared_ptr<Frame>& fr) {
        auto f = frame_at(fr, b.depth);
        Value& av = f->slots[b.slot];
        if (av.unset()) rt(loc, "array " + name + " was never allocated");
        if (!av.is_array()) rt(loc, name + " does not hold an array here");
        auto arr = av.array();
        Value vi = eval(idx, fr);
        if (!vi.is_int()) rt(idx.loc, "array index must be an integer");
        long long i = vi.as_int();
        if (i < 1 || i > static_cast<long long>(arr->cells.size()))
            rt(loc, name + "(" + std::to_string(i) + ") is outside 1.." +
                        std::to_string(arr->cells.size()));
        Value* cell = &arr->cells[static_cast<std::size_t>(i - 1)];
        return {cell, std::move(arr), i};
    }

    CellRef cell_of(const LValue& lv, const std::shared_ptr<Frame>& fr) {
        const Binding& b = bound_.binding(lv.id);
        if (!lv.index) {
            auto f = frame_at(fr, b.depth);
            return {&f->slots[b.slot], f};
        }
        ACell a = array_cell(b, *lv.index, lv.name, lv.loc, fr);
        return {a.cell, std::move(a.owner)};
    }

    // ---- expressions ----

    Value eval(const Expr& e, const std::shared_ptr<Frame>& fr) {
        return std::visit(
            [&](const auto& x) -> Value {
                using T = std::decay_t<decltype(x)>;
                if constexpr (std::is_same_v<T, IntLit>) {
                    return Value::integer(x.value);
                } else if constexpr (std::is_same_v<T, RealLit>) {
                    return Value::real(x.value);
                } else if constexpr (std::is_same_v<T, VarRef>) {
                    const Binding& b = bound_.binding(e.id);
                    if (b.kind == BindKind::Intrinsic) {
                        Closure c;
                        c.intrinsic = b.intrinsic;
                        Value v;
                        v.v = std::move(c);
                        return v;
                    }
                    auto f = frame_at(fr, b.depth);
                    return load(&f->slots[b.slot], f, e.loc, x.name);
                } else if constexpr (std::is_same_v<T, ArrayRef>) {
                    const Binding& b = bound_.binding(e.id);
                    ACell a = array_cell(b, *x.index, x.name, e.loc, fr);
                    if (a.cell->unset())
                        rt(e.loc, x.name + "(" + std::to_string(a.index) +
                                      ") used before it was set");
                    return load(a.cell, a.owner, e.loc, x.name);
                } else if constexpr (std::is_same_v<T, Neg>) {
                    Value v = eval(*x.operand, fr);
                    try {
                        return eng_.neg(v);
                    } catch (const EngineError& ex) {
                        rt(e.loc, ex.what());
                    }
                } else if constexpr (std::is_same_v<T, Binary>) {
                    Value l = eval(*x.lhs, fr);
                    Value r = eval(*x.rhs, fr);
                    try {
                        switch (x.op) {
                        case BinOp::Add: return eng_.add(l, r);
                        case BinOp::Sub: return eng_.sub(l, r);
                        case BinOp::Mul: return eng_.mul(l, r);
                        case BinOp::Div: return eng_.div(l, r);
                        case BinOp::Pow: return eng_.pow(l, r);
                        }
                        rt(e.loc, "unknown operator");
                    } catch (const EngineError& ex) {
                        rt(e.loc, ex.what());
                    }
                } else if constexpr (std::is_same_v<T, CallExpr>) {
                    std::vector<Value> args;
                    args.reserve(x.args.size());
                    for (const auto& a : x.args) args.push_back(eval(*a, fr));
                    return call_binding(bound_.binding(e.id), x.callee, std::move(args), e.loc,
                                        true, fr);
                } else {
                    // AdReadExpr: sema rejects these before execution.
                    rt(e.loc, "TANGENT/COTANGENT is only meaningful in AD block specs");
                }
            },
            e.node);
    }

    double compare_value(const Expr& e, const std::shared_ptr<Frame>& fr) {
        Value v = eval(e, fr);
        try {
            return primal_of(v);
        } catch (const EngineError& ex) {
            rt(e.loc, ex.what());
        }
    }

    long long int_of(const Expr& e, const std::shared_ptr<Frame>& fr, const char* what) {
        Value v = eval(e, fr);
        if (!v.is_int()) rt(e.loc, std::string(what) + " must be an integer");
        return v.as_int();
    }

    // ---- calls ----

    Value intrinsic_apply(Intrinsic f, std::vector<Value>& args, SrcLoc loc) {
        try {
            if (f == Intrinsic::Min || f == Intrinsic::Max) {
                if (args.size() < 2)
                    rt(loc, std::string(intrinsic_name(f)) + " expects at least 2 arguments");
                Value acc = args[0];
                for (std::size_t i = 1; i < args.size(); ++i)
                    acc = f == Intrinsic::Min ? eng_.min2(acc, args[i]) : eng_.max2(acc, args[i]);
                return acc;
            }
            if (args.size() != 1)
                rt(loc, std::string(intrinsic_name(f)) + " expects 1 argument, got " +
                            std::to_string(args.size()));
            return eng_.unary(f, args[0]);
        } catch (const EngineError& ex) {
            rt(loc, ex.what());
        }
    }

    Value call_binding(const Binding& b, const std::string& name, std::vector<Value> args,
                       SrcLoc loc, bool want_result, const std::shared_ptr<Frame>& fr) {
        if (b.kind == BindKind::Intrinsic) {
            if (!want_result) rt(loc, "cannot CALL the intrinsic " + name);
            return intrinsic_apply(b.intrinsic, args, loc);
        }
        auto f = frame_at(fr, b.depth);
        Value& cv = f->slots[b.slot];
        if (cv.unset()) rt(loc, name + " used before it was set");
        if (!cv.is_closure()) rt(loc, name + " is not callable");
        return call_closure(cv.closure(), std::move(args), loc, want_result);
    }

    Value call_closure(const Closure& c, std::vector<Value> args, SrcLoc loc, bool want_result) {
        if (c.sub == nullptr) {
            if (!want_result)
                rt(loc, "cannot CALL the intrinsic " + std::string(intrinsic_name(c.intrinsic)));
            return intrinsic_apply(c.intrinsic, args, loc);
        }
        const Subprogram& sub = *c.sub;
        if (sub.kind == SubKind::Program) rt(loc, "cannot call a PROGRAM unit");
        if (want_result && sub.kind == SubKind::Subroutine)
            rt(loc, sub.name + " is a SUBROUTINE and produces no value");
        if (!want_result && sub.kind == SubKind::Function)
            rt(loc, "CALL to FUNCTION " + sub.name + "; use it in an expression");
        if (args.size() != sub.params.size())
            rt(loc, sub.name + " expects " + std::to_string(sub.params.size()) +
                        " argument(s), got " + std::to_string(args.size()));
        if (depth_ >= opts_.recursion_limit)
            rt(loc, "recursion limit exceeded (" + std::to_string(opts_.recursion_limit) +
                        " frames)");

        const SubInfo& si = bound_.info(&sub);
        auto frame = std::make_shared<Frame>();
        frame->sub = &sub;
        frame->parent = c.frame;
        frame->slots.resize(si.nslots);
        for (std::size_t i = 0; i < args.size(); ++i) {
            if (si.slot_is_array[i] && !args[i].is_array())
                rt(loc, "argument " + std::to_string(i + 1) + " of " + sub.name +
                            " must be an array");
            frame->slots[i] = std::move(args[i]);
        }
        hoist_defs(frame, si);
        alloc_arrays(frame, si);

        ++depth_;
        try {
            exec_body(sub.body, frame);
        } catch (...) {
            --depth_;
            throw;
        }
        --depth_;

        if (sub.kind == SubKind::Function) {
            Value r = frame->slots[si.result_slot];
            if (r.unset()) rt(loc, sub.name + " ended without assigning a result");
            return r;
        }
        return Value{};
    }

    // ---- statements ----

    Flow exec_body(const std::vector<Stmt>& body, const std::shared_ptr<Frame>& fr) {
        for (const auto& st : body)
            if (exec(st, fr) == Flow::Returned) return Flow::Returned;
        return Flow::Normal;
    }

    Flow exec(const Stmt& st, const std::shared_ptr<Frame>& fr) {
        if ((++stmt_count_ & 4095u) == 0) check_deadline(st.loc);
        return std::visit(
            [&](const auto& x) -> Flow {
                using T = std::decay_t<decltype(x)>;
                if constexpr (std::is_same_v<T, AssignStmt>) {
                    Value v = eval(*x.value, fr);
                    store(cell_of(x.target, fr), std::move(v));
                    return Flow::Normal;
                } else if constexpr (std::is_same_v<T, CallStmt>) {
                    std::vector<Value> args;
                    args.reserve(x.args.size());
                    for (const auto& a : x.args) args.push_back(eval(*a, fr));
                    call_binding(bound_.binding(st.id), x.callee, std::move(args), st.loc, false,
                                 fr);
                    return Flow::Normal;
                } else if constexpr (std::is_same_v<T, IfStmt>) {
                    double l = compare_value(*x.lhs, fr);
                    double r = compare_value(*x.rhs, fr);
                    bool cond = false;
                    switch (x.op) {
                    case RelOp::Lt: cond = l < r; break;
                    case RelOp::Le: cond = l <= r; break;
                    case RelOp::Gt: cond = l > r; break;
                    case RelOp::Ge: cond = l >= r; break;
                    case RelOp::Eq: cond = l == r; break;
                    case RelOp::Ne: cond = l != r; break;
                    }
                    return exec_body(cond ? x.then_body : x.else_body, fr);
                } else if constexpr (std::is_same_v<T, DoStmt>) {
                    return exec_do(x, fr);
                } else if constexpr (std::is_same_v<T, PrintStmt>) {
                    const std::vector<std::string>& names = print_names(st.id, x);
                    std::vector<PrintItem> items;
                    items.reserve(x.values.size());
                    for (std::size_t i = 0; i < x.values.size(); ++i)
                        items.push_back({names[i], eval(*x.values[i], fr)});
                    if (opts_.on_print) opts_.on_print(items);
                    return Flow::Normal;
                } else if constexpr (std::is_same_v<T, ReturnStmt>) {
                    return Flow::Returned;
                } else if constexpr (std::is_same_v<T, SubDefStmt>) {
                    return Flow::Normal; // hoisted at frame entry
                } else if constexpr (std::is_same_v<T, AdBlockStmt>) {
                    if (x.block.mode == AdMode::Forward)
                        exec_adf(x.block, fr);
                    else
                        exec_adr(x.block, fr);
                    return Flow::Normal;
                } else {
                    // AdMisuseStmt: sema rejects these before execution.
                    rt(st.loc, "TANGENT/COTANGENT assignment outside an AD block");
                }
            },
            st.node);
    }

    Flow exec_do(const DoStmt& x, const std::shared_ptr<Frame>& fr) {
        long long lo = int_of(*x.lo, fr, "DO bound");
        long long hi = int_of(*x.hi, fr, "DO bound");
        long long step = x.step ? int_of(*x.step, fr, "DO step") : 1;
        if (step == 0) rt(x.lo->loc, "DO step of 0");
        long long trips = 0;
        if (step > 0 && lo <= hi) trips = (hi - lo) / step + 1;
        if (step < 0 && lo >= hi) trips = (lo - hi) / (-step) + 1;
        const Binding& b = bound_.binding(x.var_id);
        auto f = frame_at(fr, b.depth);
        CellRef vc{&f->slots[b.slot], f};
        for (long long k = 0; k < trips; ++k) {
            store(vc, Value::integer(lo + k * step));
            if (exec_body(x.body, fr) == Flow::Returned) return Flow::Returned;
        }
        return Flow::Normal;
    }

    const std::vector<std::string>& print_names(NodeId id, const PrintStmt& x) {
        auto [it, fresh] = print_names_.try_emplace(id);
        if (fresh)
            for (const auto& v : x.values) it->second.push_back(strip_spaces(print_expr(*v)));
        return it->second;
    }

    // ---- AD blocks ----

    template <typename F>
    void expand_spec(const AdSpec& spec, const std::shared_ptr<Frame>& fr, const F& f) {
        if (!spec.has_loop) {
            for (const auto& b : spec.bindings) f(b);
            return;
        }
        long long lo = int_of(*spec.lo, fr, "implied-do bound");
        long long hi = int_of(*spec.hi, fr, "implied-do bound");
        const Binding& vb = bound_.binding(spec.loop_var_id);
        auto vf = frame_at(fr, vb.depth);
        CellRef vc{&vf->slots[vb.slot], vf};
        for (long long i = lo; i <= hi; ++i) {
            store(vc, Value::integer(i));
            for (const auto& b : spec.bindings) f(b);
        }
    }

    void finish_activation(Activation& act, Tag t) {
        for (auto& [cell, owner] : act.touched) {
            (void)owner;
            *cell = eng_.strip_tag(*cell, t);
        }
        if (!ad_stack_.empty()) {
            auto& parent = ad_stack_.back().touched;
            for (auto& [cell, owner] : act.touched) parent.emplace(cell, std::move(owner));
        }
    }

    void exec_adf(const AdBlock& blk, const std::shared_ptr<Frame>& fr) {
        Tag t = eng_.fresh_tag();
        ad_stack_.push_back(Activation{AdMode::Forward, t, nullptr, {}, {}});
        try {
            for (const auto& spec : blk.open)
                expand_spec(spec, fr, [&](const AdBinding& b) {
                    CellRef c = cell_of(b.ad_ref, fr);
                    if (c.cell->unset())
                        rt(b.ad_ref.loc, b.ad_ref.name + " used before it was set");
                    if (!c.cell->is_numeric())
                        rt(b.ad_ref.loc, "TANGENT of a non-numeric value");
                    Value seed = eval(*b.seed, fr);
                    if (!seed.is_numeric()) rt(b.seed->loc, "tangent seed must be numeric");
                    write_cell(c, eng_.make_dual(t, *c.cell, std::move(seed)));
                });
            if (exec_body(blk.body, fr) == Flow::Returned)
                rt(blk.loc, "RETURN inside an ADF block");
            for (const auto& spec : blk.close)
                expand_spec(spec, fr, [&](const AdBinding& b) {
                    CellRef src = cell_of(b.ad_ref, fr);
                    if (src.cell->unset())
                        rt(b.ad_ref.loc, b.ad_ref.name + " used before it was set");
                    Value tan = eng_.tangent_of(*src.cell, t);
                    store(cell_of(b.out, fr), std::move(tan));
                });
        } catch (...) {
            ad_stack_.pop_back();
            throw;
        }
        Activation act = std::move(ad_stack_.back());
        ad_stack_.pop_back();
        finish_activation(act, t);
    }

    void exec_adr(const AdBlock& blk, const std::shared_ptr<Frame>& fr) {
        Tag t = eng_.fresh_tag();
        auto tape = eng_.push_tape(t);
        ad_stack_.push_back(Activation{AdMode::Reverse, t, tape, {}, {}});
        try {
            if (exec_body(blk.body, fr) == Flow::Returned)
                rt(blk.loc, "RETURN inside an ADR block");
            // Cotangent seeds attach after the body, to whatever tape node
            // the named variable holds by then. A value that never touched
            // this tape (a constant result) has no node; its seed
            // contributes nothing and every cotangent comes out zero.
            for (const auto& spec : blk.open)
                expand_spec(spec, fr, [&](const AdBinding& b) {
                    CellRef c = cell_of(b.ad_ref, fr);
                    if (c.cell->unset())
                        rt(b.ad_ref.loc, b.ad_ref.name + " used before it was set");
                    Value seed = eng_.strip_tag(eval(*b.seed, fr), t);
                    const Value& v = *c.cell;
                    if (top_tag(v) == t && v.is_tracer())
                        eng_.add_adjoint(t, v.tracer()->node, seed);
                });
            eng_.reverse_sweep(t);
            Activation& act = ad_stack_.back();
            for (const auto& spec : blk.close)
                expand_spec(spec, fr, [&](const AdBinding& b) {
                    CellRef src = cell_of(b.ad_ref, fr);
                    Value adj;
                    auto it = act.leaves.find(src.cell);
                    if (it != act.leaves.end())
                        adj = eng_.adjoint_of(t, it->second);
                    else if (top_tag(*src.cell) == t && src.cell->is_tracer())
                        adj = eng_.adjoint_of(t, src.cell->tracer()->node);
                    else
                        adj = Value::real(0.0);
                    store(cell_of(b.out, fr), std::move(adj));
                });
            if (opts_.on_tape) opts_.on_tape(*tape);
        } catch (...) {
            ad_stack_.pop_back();
            eng_.pop_tape();
            throw;
        }
        Activation act = std::move(ad_stack_.back());
        ad_stack_.pop_back();
        finish_activation(act, t);
        eng_.pop_tape();
    }

    void check_deadline(SrcLoc loc) {
        if (opts_.time_limit_seconds <= 0) return;
        std::chrono::duration<double> el = std::chrono::steady_clock::now() - start_;
        if (el.count() > opts_.time_limit_seconds) rt(loc, "time limit exceeded");
    }

    const BoundProgram& bound_;
    Engine& eng_;
    const RunOptions& opts_;
    std::chrono::steady_clock::time_point start_;
    std::vector<Activation> ad_stack_;
    std::unordered_set<Value*> pinned_;
    std::unordered_map<NodeId, std::vector<std::string>> print_names_;
    long long depth_ = 0;
    unsigned long long stmt_count_ = 0;
};

} // namespace

void run_program(const BoundProgram& bound, Engine& engine, const RunOptions& opts) {
    if (!bound.main)
        throw RuntimeError(Diagnostic{Phase::Runtime, {}, "no PROGRAM unit to run"});
    Context ctx(bound, engine, opts);
    ctx.run();
}

} // namespace farfel
