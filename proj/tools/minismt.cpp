// minismt: a tiny SMT-LIB2 QF_BV solver that decides by exhaustive
// enumeration (up to 24 total free-constant bits). It exists so the
// external-solver protocol has a real subprocess to talk to on machines
// without z3/stp installed; it follows SMT-LIB total division semantics
// and is written independently of the library it is used to test.

#include <cstdint>
#include <cstdio>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace
{

// ---------------------------------------------------------------- sexprs

struct sexpr
{
    std::string atom; // empty means list
    std::vector<sexpr> items;
    bool is_atom() const { return items.empty() && !atom.empty(); }
};

struct reader
{
    std::istream &in;
    explicit reader(std::istream &s) : in(s) {}

    int peek_skip_ws()
    {
        for (;;) {
            int c = in.peek();
            if (c == ';') {
                while (c != EOF && c != '\n') { in.get(); c = in.peek(); }
            } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
                in.get();
            } else {
                return c;
            }
        }
    }

    std::optional<sexpr> next()
    {
        int c = peek_skip_ws();
        if (c == EOF)
            return std::nullopt;
        if (c == '(') {
            in.get();
            sexpr e;
            for (;;) {
                c = peek_skip_ws();
                if (c == EOF)
                    return std::nullopt;
                if (c == ')') { in.get(); break; }
                auto sub = next();
                if (!sub)
                    return std::nullopt;
                e.items.push_back(std::move(*sub));
            }
            if (e.items.empty())
                e.atom = ""; // "()" – keep as empty list
            return e;
        }
        if (c == '|') { // quoted symbol
            in.get();
            sexpr e;
            while ((c = in.get()) != EOF && c != '|')
                e.atom += char(c);
            return e;
        }
        if (c == '"') {
            in.get();
            sexpr e;
            e.atom = "\"";
            while ((c = in.get()) != EOF && c != '"')
                e.atom += char(c);
            e.atom += '"';
            return e;
        }
        sexpr e;
        while ((c = in.peek()) != EOF && c != '(' && c != ')' && c != ' ' && c != '\t' &&
               c != '\n' && c != '\r' && c != ';')
            e.atom += char(in.get());
        return e;
    }
};

// ---------------------------------------------------------------- values

struct value
{
    bool boolean = false; // sort flag
    int width = 0;        // bitvec width
    uint64_t bits = 0;
    bool truth = false;
};

uint64_t vmask(int w) { return w >= 64 ? ~0ull : (1ull << w) - 1; }

int64_t to_signed(uint64_t v, int w)
{
    uint64_t m = 1ull << (w - 1);
    return int64_t(((v & vmask(w)) ^ m) - m);
}

// ---------------------------------------------------------------- program

// compiled expression DAG; slots evaluate in order, children first
struct slot
{
    enum class op
    {
        konst, konst_bool, sym, ref,
        bvadd, bvsub, bvmul, bvudiv, bvurem, bvsdiv, bvsrem,
        bvand, bvor, bvxor, bvshl, bvlshr, bvashr, bvnot, bvneg,
        eq, distinct, bvult, bvule, bvugt, bvuge, bvslt, bvsle, bvsgt, bvsge,
        band, bor, bnot, bimplies, bxor_bool, ite,
        zero_extend, sign_extend, extract, concat,
    };
    op kind = op::konst;
    int width = 0; // result width (bitvec) / 0 for bool
    bool boolean = false;
    uint64_t payload = 0; // constant bits / symbol index / extend amount
    uint64_t payload2 = 0; // extract low bit
    int a = -1, b = -1, c = -1;
};

struct declared
{
    std::string name;
    int width;
};

struct solver
{
    std::vector<declared> consts;
    std::vector<sexpr> asserts;
    std::map<std::string, sexpr> defs;         // define-fun macros
    std::vector<std::string> def_order;
    struct frame { size_t nconsts, nasserts, ndefs; };
    std::vector<frame> stack;

    bool have_model = false;
    std::vector<uint64_t> model;

    // ---- compilation ------------------------------------------------
    std::vector<slot> prog;
    std::map<std::string, int> compiled_defs;
    std::vector<int> assert_slots;
    std::string error;

    int emit(slot s)
    {
        prog.push_back(s);
        return int(prog.size() - 1);
    }

    [[noreturn]] void fail(const std::string &m)
    {
        error = m;
        throw std::runtime_error(m);
    }

    int find_const(const std::string &n)
    {
        for (size_t i = 0; i < consts.size(); ++i)
            if (consts[i].name == n)
                return int(i);
        return -1;
    }

    using env_t = std::map<std::string, int>;

    int compile(const sexpr &e, env_t &env)
    {
        if (e.is_atom()) {
            const std::string &a = e.atom;
            if (a == "true")
                return emit({slot::op::konst_bool, 0, true, 1, 0, -1, -1, -1});
            if (a == "false")
                return emit({slot::op::konst_bool, 0, true, 0, 0, -1, -1, -1});
            if (a.size() > 2 && a[0] == '#' && a[1] == 'x') {
                uint64_t v = 0;
                for (char ch : a.substr(2)) {
                    int d = ch >= '0' && ch <= '9' ? ch - '0'
                          : ch >= 'a' && ch <= 'f' ? ch - 'a' + 10
                          : ch >= 'A' && ch <= 'F' ? ch - 'A' + 10 : -1;
                    if (d < 0)
                        fail("bad hex literal " + a);
                    v = v << 4 | uint64_t(d);
                }
                return emit({slot::op::konst, int(4 * (a.size() - 2)), false, v, 0, -1, -1, -1});
            }
            if (a.size() > 2 && a[0] == '#' && a[1] == 'b') {
                uint64_t v = 0;
                for (char ch : a.substr(2)) {
                    if (ch != '0' && ch != '1')
                        fail("bad binary literal " + a);
                    v = v << 1 | uint64_t(ch - '0');
                }
                return emit({slot::op::konst, int(a.size() - 2), false, v, 0, -1, -1, -1});
            }
            if (auto it = env.find(a); it != env.end())
                return it->second;
            if (int ci = find_const(a); ci >= 0)
                return emit({slot::op::sym, consts[ci].width, false, uint64_t(ci), 0, -1, -1, -1});
            if (auto it = defs.find(a); it != defs.end()) {
                if (auto jt = compiled_defs.find(a); jt != compiled_defs.end())
                    return jt->second;
                env_t fresh;
                int s = compile(it->second, fresh);
                compiled_defs[a] = s;
                return s;
            }
            fail("unknown symbol " + a);
        }

        const auto &it = e.items;
        if (it.empty())
            fail("empty application");

        // (_ bvN W) literals and indexed operators
        if (it[0].is_atom() && it[0].atom == "_") {
            if (it.size() == 3 && it[1].atom.size() > 2 && it[1].atom.substr(0, 2) == "bv") {
                uint64_t v = std::stoull(it[1].atom.substr(2));
                int w = std::stoi(it[2].atom);
                return emit({slot::op::konst, w, false, v & vmask(w), 0, -1, -1, -1});
            }
            fail("unsupported indexed term");
        }

        // ((_ op k) x) style
        if (!it[0].is_atom() && it[0].items.size() >= 2 && it[0].items[0].atom == "_") {
            const std::string &op = it[0].items[1].atom;
            if (op == "zero_extend" || op == "sign_extend") {
                int k = std::stoi(it[0].items[2].atom);
                int x = compile(it[1], env);
                slot s;
                s.kind = op[0] == 'z' ? slot::op::zero_extend : slot::op::sign_extend;
                s.width = prog[x].width + k;
                s.a = x;
                return emit(s);
            }
            if (op == "extract") {
                int hi = std::stoi(it[0].items[2].atom);
                int lo = std::stoi(it[0].items[3].atom);
                int x = compile(it[1], env);
                slot s;
                s.kind = slot::op::extract;
                s.width = hi - lo + 1;
                s.payload = uint64_t(hi);
                s.payload2 = uint64_t(lo);
                s.a = x;
                return emit(s);
            }
            fail("unsupported indexed operator");
        }

        const std::string &h = it[0].atom;

        if (h == "let") {
            env_t inner = env;
            for (const auto &bind : it[1].items)
                inner[bind.items[0].atom] = compile(bind.items[1], env);
            return compile(it[2], inner);
        }

        if (h == "ite") {
            int c = compile(it[1], env), a = compile(it[2], env), b = compile(it[3], env);
            slot s;
            s.kind = slot::op::ite;
            s.width = prog[a].width;
            s.boolean = prog[a].boolean;
            s.a = c; s.b = a; s.c = b;
            return emit(s);
        }

        auto nary_bool = [&](slot::op k, bool neutral) {
            if (it.size() == 2)
                return compile(it[1], env);
            int acc = compile(it[1], env);
            for (size_t i = 2; i < it.size(); ++i) {
                int nxt = compile(it[i], env);
                acc = emit({k, 0, true, neutral, 0, acc, nxt, -1});
            }
            return acc;
        };

        if (h == "and") return nary_bool(slot::op::band, 1);
        if (h == "or") return nary_bool(slot::op::bor, 0);
        if (h == "xor") return nary_bool(slot::op::bxor_bool, 0);
        if (h == "=>") {
            int a = compile(it[1], env), b = compile(it[2], env);
            return emit({slot::op::bimplies, 0, true, 0, 0, a, b, -1});
        }
        if (h == "not") {
            int a = compile(it[1], env);
            return emit({slot::op::bnot, 0, true, 0, 0, a, -1, -1});
        }

        static const std::map<std::string, slot::op> unary = {
            {"bvnot", slot::op::bvnot}, {"bvneg", slot::op::bvneg},
        };
        if (auto u = unary.find(h); u != unary.end()) {
            int a = compile(it[1], env);
            return emit({u->second, prog[a].width, false, 0, 0, a, -1, -1});
        }

        static const std::map<std::string, slot::op> binary = {
            {"bvadd", slot::op::bvadd}, {"bvsub", slot::op::bvsub}, {"bvmul", slot::op::bvmul},
            {"bvudiv", slot::op::bvudiv}, {"bvurem", slot::op::bvurem},
            {"bvsdiv", slot::op::bvsdiv}, {"bvsrem", slot::op::bvsrem},
            {"bvand", slot::op::bvand}, {"bvor", slot::op::bvor}, {"bvxor", slot::op::bvxor},
            {"bvshl", slot::op::bvshl}, {"bvlshr", slot::op::bvlshr}, {"bvashr", slot::op::bvashr},
            {"concat", slot::op::concat},
        };
        if (auto b2 = binary.find(h); b2 != binary.end()) {
            int acc = compile(it[1], env);
            for (size_t i = 2; i < it.size(); ++i) { // left-assoc chains
                int nxt = compile(it[i], env);
                int w = prog[acc].width;
                if (h == "concat")
                    w = prog[acc].width + prog[nxt].width;
                acc = emit({b2->second, w, false, 0, 0, acc, nxt, -1});
            }
            return acc;
        }

        static const std::map<std::string, slot::op> preds = {
            {"=", slot::op::eq}, {"distinct", slot::op::distinct},
            {"bvult", slot::op::bvult}, {"bvule", slot::op::bvule},
            {"bvugt", slot::op::bvugt}, {"bvuge", slot::op::bvuge},
            {"bvslt", slot::op::bvslt}, {"bvsle", slot::op::bvsle},
            {"bvsgt", slot::op::bvsgt}, {"bvsge", slot::op::bvsge},
        };
        if (auto p = preds.find(h); p != preds.end()) {
            int a = compile(it[1], env), b = compile(it[2], env);
            int r = emit({p->second, 0, true, 0, 0, a, b, -1});
            // chained equality: (= a b c)
            for (size_t i = 3; i < it.size(); ++i) {
                int c = compile(it[i], env);
                int r2 = emit({p->second, 0, true, 0, 0, b, c, -1});
                r = emit({slot::op::band, 0, true, 0, 0, r, r2, -1});
                b = c;
            }
            return r;
        }

        fail("unsupported operator " + h);
    }

    // ---- evaluation ---------------------------------------------------
    std::vector<value> vals;

    void eval(const std::vector<uint64_t> &assignment)
    {
        vals.resize(prog.size());
        for (size_t i = 0; i < prog.size(); ++i) {
            const slot &s = prog[i];
            auto A = [&]() -> const value & { return vals[s.a]; };
            auto B = [&]() -> const value & { return vals[s.b]; };
            value r;
            r.boolean = s.boolean;
            r.width = s.width;
            int w = s.width;
            switch (s.kind) {
                case slot::op::konst: r.bits = s.payload & vmask(w); break;
                case slot::op::konst_bool: r.truth = s.payload; break;
                case slot::op::sym: r.bits = assignment[s.payload] & vmask(w); break;
                case slot::op::ref: r = vals[s.a]; break;
                case slot::op::bvadd: r.bits = (A().bits + B().bits) & vmask(w); break;
                case slot::op::bvsub: r.bits = (A().bits - B().bits) & vmask(w); break;
                case slot::op::bvmul: r.bits = (A().bits * B().bits) & vmask(w); break;
                case slot::op::bvudiv:
                    r.bits = B().bits ? (A().bits / B().bits) & vmask(w) : vmask(w);
                    break;
                case slot::op::bvurem:
                    r.bits = B().bits ? (A().bits % B().bits) & vmask(w) : A().bits;
                    break;
                case slot::op::bvsdiv: {
                    // SMT-LIB definition via sign cases on total bvudiv
                    uint64_t a = A().bits, b = B().bits;
                    bool sa = (a >> (w - 1)) & 1, sb = (b >> (w - 1)) & 1;
                    uint64_t ua = sa ? (~a + 1) & vmask(w) : a;
                    uint64_t ub = sb ? (~b + 1) & vmask(w) : b;
                    if (!ub) {
                        r.bits = sa ? 1 : vmask(w);
                        break;
                    }
                    uint64_t q = ua / ub;
                    r.bits = (sa != sb ? (~q + 1) : q) & vmask(w);
                    break;
                }
                case slot::op::bvsrem: {
                    uint64_t a = A().bits, b = B().bits;
                    bool sa = (a >> (w - 1)) & 1, sb = (b >> (w - 1)) & 1;
                    uint64_t ua = sa ? (~a + 1) & vmask(w) : a;
                    uint64_t ub = sb ? (~b + 1) & vmask(w) : b;
                    uint64_t m = ub ? ua % ub : ua;
                    r.bits = (sa ? (~m + 1) : m) & vmask(w);
                    break;
                }
                case slot::op::bvand: r.bits = A().bits & B().bits; break;
                case slot::op::bvor: r.bits = A().bits | B().bits; break;
                case slot::op::bvxor: r.bits = A().bits ^ B().bits; break;
                case slot::op::bvshl: {
                    uint64_t sh = B().bits;
                    r.bits = sh >= uint64_t(w) ? 0 : (A().bits << sh) & vmask(w);
                    break;
                }
                case slot::op::bvlshr: {
                    uint64_t sh = B().bits;
                    r.bits = sh >= uint64_t(w) ? 0 : A().bits >> sh;
                    break;
                }
                case slot::op::bvashr: {
                    uint64_t sh = B().bits;
                    int aw = prog[s.a].width;
                    bool sg = (A().bits >> (aw - 1)) & 1;
                    if (sh >= uint64_t(aw))
                        r.bits = sg ? vmask(aw) : 0;
                    else
                        r.bits = uint64_t(to_signed(A().bits, aw) >> sh) & vmask(aw);
                    break;
                }
                case slot::op::bvnot: r.bits = ~A().bits & vmask(w); break;
                case slot::op::bvneg: r.bits = (~A().bits + 1) & vmask(w); break;
                case slot::op::eq:
                    r.truth = A().boolean ? A().truth == B().truth : A().bits == B().bits;
                    break;
                case slot::op::distinct:
                    r.truth = A().boolean ? A().truth != B().truth : A().bits != B().bits;
                    break;
                case slot::op::bvult: r.truth = A().bits < B().bits; break;
                case slot::op::bvule: r.truth = A().bits <= B().bits; break;
                case slot::op::bvugt: r.truth = A().bits > B().bits; break;
                case slot::op::bvuge: r.truth = A().bits >= B().bits; break;
                case slot::op::bvslt:
                    r.truth = to_signed(A().bits, prog[s.a].width) < to_signed(B().bits, prog[s.a].width);
                    break;
                case slot::op::bvsle:
                    r.truth = to_signed(A().bits, prog[s.a].width) <= to_signed(B().bits, prog[s.a].width);
                    break;
                case slot::op::bvsgt:
                    r.truth = to_signed(A().bits, prog[s.a].width) > to_signed(B().bits, prog[s.a].width);
                    break;
                case slot::op::bvsge:
                    r.truth = to_signed(A().bits, prog[s.a].width) >= to_signed(B().bits, prog[s.a].width);
                    break;
                case slot::op::band: r.truth = A().truth && B().truth; break;
                case slot::op::bor: r.truth = A().truth || B().truth; break;
                case slot::op::bxor_bool: r.truth = A().truth != B().truth; break;
                case slot::op::bimplies: r.truth = !A().truth || B().truth; break;
                case slot::op::bnot: r.truth = !A().truth; break;
                case slot::op::ite: r = A().truth ? vals[s.b] : vals[s.c]; break;
                case slot::op::zero_extend: r.bits = A().bits; break;
                case slot::op::sign_extend: {
                    int aw = prog[s.a].width;
                    r.bits = uint64_t(to_signed(A().bits, aw)) & vmask(w);
                    break;
                }
                case slot::op::extract:
                    r.bits = (A().bits >> s.payload2) & vmask(w);
                    break;
                case slot::op::concat:
                    r.bits = (A().bits << prog[s.b].width | B().bits) & vmask(w);
                    break;
            }
            vals[i] = r;
        }
    }

    std::string check_sat()
    {
        prog.clear();
        compiled_defs.clear();
        assert_slots.clear();
        have_model = false;

        uint64_t total_bits = 0;
        for (auto &c : consts)
            total_bits += uint64_t(c.width);
        if (total_bits > 24)
            return "unknown";

        try {
            env_t env;
            for (auto &a : asserts)
                assert_slots.push_back(compile(a, env));
        } catch (const std::runtime_error &) {
            return "(error \"" + error + "\")";
        }

        std::vector<uint64_t> assignment(consts.size(), 0);
        uint64_t count = 1ull << total_bits;
        for (uint64_t ctr = 0;; ++ctr) {
            uint64_t rest = ctr;
            for (size_t i = 0; i < consts.size(); ++i) {
                assignment[i] = rest & vmask(consts[i].width);
                rest >>= consts[i].width;
            }
            eval(assignment);
            bool ok = true;
            for (int s : assert_slots)
                ok = ok && (prog[s].boolean ? vals[s].truth : vals[s].bits == 1);
            if (ok) {
                have_model = true;
                model = assignment;
                return "sat";
            }
            if (ctr + 1 == count)
                break;
        }
        return "unsat";
    }

    std::string format_value(int idx) const
    {
        int w = consts[idx].width;
        uint64_t v = model[idx] & vmask(w);
        std::string out;
        if (w % 4 == 0) {
            static const char *d = "0123456789abcdef";
            out = "#x";
            for (int i = w / 4 - 1; i >= 0; --i)
                out += d[(v >> (4 * i)) & 0xf];
        } else {
            out = "#b";
            for (int i = w - 1; i >= 0; --i)
                out += char('0' + ((v >> i) & 1));
        }
        return out;
    }
};

int sort_width(const sexpr &s)
{
    // (_ BitVec N) or Bool
    if (s.is_atom() && s.atom == "Bool")
        return 0;
    if (s.items.size() == 3 && s.items[1].atom == "BitVec")
        return std::stoi(s.items[2].atom);
    return -1;
}

} // namespace

int main()
{
    std::ios::sync_with_stdio(false);
    reader rd(std::cin);
    solver sol;

    for (;;) {
        auto cmd = rd.next();
        if (!cmd)
            break;
        if (cmd->items.empty())
            continue;
        const std::string &h = cmd->items[0].atom;

        if (h == "exit")
            break;
        if (h == "set-logic" || h == "set-option" || h == "set-info")
            continue;
        if (h == "reset") {
            sol = solver{};
            continue;
        }
        if (h == "push") {
            size_t n = cmd->items.size() > 1 ? std::stoul(cmd->items[1].atom) : 1;
            for (size_t i = 0; i < n; ++i)
                sol.stack.push_back({sol.consts.size(), sol.asserts.size(), sol.def_order.size()});
            continue;
        }
        if (h == "pop") {
            size_t n = cmd->items.size() > 1 ? std::stoul(cmd->items[1].atom) : 1;
            for (size_t i = 0; i < n && !sol.stack.empty(); ++i) {
                auto f = sol.stack.back();
                sol.stack.pop_back();
                sol.consts.resize(f.nconsts);
                sol.asserts.resize(f.nasserts);
                while (sol.def_order.size() > f.ndefs) {
                    sol.defs.erase(sol.def_order.back());
                    sol.def_order.pop_back();
                }
            }
            sol.have_model = false;
            continue;
        }
        if (h == "declare-const" || h == "declare-fun") {
            const sexpr &sort = cmd->items.back();
            int w = sort_width(sort);
            if (w <= 0) {
                std::cout << "(error \"unsupported sort\")\n" << std::flush;
                continue;
            }
            sol.consts.push_back({cmd->items[1].atom, w});
            continue;
        }
        if (h == "define-fun") {
            // (define-fun name () sort body)
            sol.defs[cmd->items[1].atom] = cmd->items[4];
            sol.def_order.push_back(cmd->items[1].atom);
            continue;
        }
        if (h == "assert") {
            sol.asserts.push_back(cmd->items[1]);
            continue;
        }
        if (h == "check-sat") {
            std::cout << sol.check_sat() << "\n" << std::flush;
            continue;
        }
        if (h == "get-value") {
            if (!sol.have_model) {
                std::cout << "(error \"no model available\")\n" << std::flush;
                continue;
            }
            std::cout << "(";
            bool first = true;
            for (const auto &q : cmd->items[1].items) {
                int ci = sol.find_const(q.atom);
                if (ci < 0)
                    continue;
                if (!first)
                    std::cout << " ";
                first = false;
                std::cout << "(" << q.atom << " " << sol.format_value(ci) << ")";
            }
            std::cout << ")\n" << std::flush;
            continue;
        }
        std::cout << "(error \"unsupported command " << h << "\")\n" << std::flush;
    }
    return 0;
}
