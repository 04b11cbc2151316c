#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include <symtrans/explorer.hpp>
#include <symtrans/parity_domain.hpp>
#include <symtrans/report.hpp>
#include <symtrans/term_domain.hpp>
#include <symtrans/version.hpp>

#include <unistd.h>

using namespace symtrans;

namespace
{

// exit codes: 0 ok/safe, 1 violation, 2 usage/transform error, 3 unknown,
// 101 trap (run), 102 blocked by a failed assume (run)
constexpr int exit_ok = 0, exit_violation = 1, exit_usage = 2, exit_unknown = 3;
constexpr int exit_trap = 101, exit_blocked = 102;

std::optional<std::string> read_file(const std::string &path)
{
    if (path == "-") {
        std::ostringstream os;
        os << std::cin.rdbuf();
        return os.str();
    }
    std::ifstream in(path, std::ios::binary);
    if (!in)
        return std::nullopt;
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

bool write_output(const std::string &path, const std::string &data)
{
    if (path == "-") {
        std::cout << data;
        return bool(std::cout);
    }
    std::ofstream out(path, std::ios::binary);
    out << data;
    return bool(out);
}

std::optional<ir_module> load_module(const std::string &path)
{
    auto text = read_file(path);
    if (!text) {
        std::cerr << "symtrans: cannot read " << path << "\n";
        return std::nullopt;
    }
    auto pr = parse_module(*text);
    if (!pr.ok()) {
        std::cerr << "symtrans: " << path << ":\n" << join_diags(pr.errors);
        return std::nullopt;
    }
    auto vd = validate(*pr.module);
    if (!vd.empty()) {
        std::cerr << "symtrans: " << path << ":\n" << join_diags(vd);
        return std::nullopt;
    }
    return std::move(pr.module);
}

domain_registry &default_registry()
{
    static domain_registry reg = [] {
        domain_registry r;
        r.add(std::make_unique<term_domain>());
        r.add(std::make_unique<parity_domain>());
        return r;
    }();
    return reg;
}

std::vector<std::string> split_ws(const std::string &s)
{
    std::vector<std::string> out;
    std::istringstream is(s);
    std::string w;
    while (is >> w)
        out.push_back(w);
    return out;
}

std::optional<std::vector<std::string>> find_external_solver(const std::string &solver_path)
{
    if (!solver_path.empty())
        return split_ws(solver_path);
    if (const char *env = getenv("SYMTRANS_SOLVER"); env && *env)
        return split_ws(env);
    // the bundled minismt next to this executable
    char buf[4096];
    ssize_t n = readlink("/proc/self/exe", buf, sizeof buf - 1);
    if (n > 0) {
        buf[n] = 0;
        std::string dir(buf);
        auto slash = dir.rfind('/');
        if (slash != std::string::npos) {
            std::string cand = dir.substr(0, slash) + "/minismt";
            if (!access(cand.c_str(), X_OK))
                return std::vector<std::string>{cand};
        }
    }
    return std::nullopt;
}

struct solver_opts
{
    std::string mode = "auto"; // auto | brute | ext
    std::string path;
    int timeout_ms = 30000;
};

solver_factory make_solver_factory(const solver_opts &so, std::string &desc)
{
    if (so.mode == "brute") {
        desc = "brute";
        return [] { return std::make_unique<brute_force_solver>(); };
    }
    auto ext = find_external_solver(so.path);
    if (ext) {
        desc = "external:" + (*ext)[0];
        auto argv = *ext;
        int timeout = so.timeout_ms;
        return [argv, timeout] { return std::make_unique<external_solver>(argv, timeout); };
    }
    if (so.mode == "ext") {
        desc = "";
        return nullptr;
    }
    desc = "brute";
    return [] { return std::make_unique<brute_force_solver>(); };
}

std::vector<uint64_t> parse_u64_list(const std::string &s)
{
    std::vector<uint64_t> out;
    std::string cur;
    for (char c : s + ",") {
        if (c == ',') {
            if (!cur.empty())
                out.push_back(std::stoull(cur));
            cur.clear();
        } else if (!isspace(uint8_t(c)))
            cur += c;
    }
    return out;
}

// drives a module with a fixed choice trail; shared by run and dump-smt
struct run_outcome
{
    int exit_code = exit_ok;
    std::string note;
};

run_outcome drive(vm &w, machine_state &st, const std::vector<uint64_t> &trail)
{
    size_t cursor = 0;
    for (;;) {
        vm_event ev = w.resume(st);
        switch (ev.k) {
            case vm_event::kind::need_choice: {
                if (cursor >= trail.size())
                    return {exit_usage, "choice at " + ev.site + " but the trail is exhausted"};
                if (auto t = w.provide_choice(st, uint32_t(trail[cursor++])))
                    return {exit_trap, t->message};
                continue;
            }
            case vm_event::kind::assume_recorded:
            case vm_event::kind::abstract_div:
                continue;
            case vm_event::kind::div_unknown:
                continue;
            case vm_event::kind::abstract_assert: {
                // without a verifier we assume the asserted condition holds
                auto *d = default_registry().by_id(ev.cond.domain);
                if (d) {
                    auto ctx = w.make_ctx(st);
                    d->assume(ev.cond.payload, 1, ctx);
                }
                st.output.push_back("[assert recorded symbolically]");
                continue;
            }
            case vm_event::kind::assume_blocked:
            case vm_event::kind::assume_infeasible:
                return {exit_blocked, "execution blocked by a failed assume"};
            case vm_event::kind::trapped:
                return {exit_trap, ev.message};
            case vm_event::kind::exited:
                return {int(ev.exit_code & 0xff), ""};
            case vm_event::kind::step_budget:
                return {exit_unknown, "step budget exhausted"};
        }
    }
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"symtrans: compilation-based symbolic execution toolkit"};
    app.set_version_flag("--version", std::string("symtrans ") + tool_version +
                                          " (report schema " + report_schema_version + ")");
    app.require_subcommand(1);

    // ---- transform -----------------------------------------------------
    auto *t = app.add_subcommand("transform", "abstract a program over a domain");
    std::string t_domain = "term", t_in, t_in_flag, t_out = "-";
    t->add_option("--domain", t_domain, "abstract domain")->check(CLI::IsMember({"term", "parity"}));
    t->add_option("input", t_in, "input program (.sir)");
    t->add_option("--in", t_in_flag, "input program (.sir)");
    t->add_option("--out,-o", t_out, "output path ('-' for stdout)");

    // ---- run -------------------------------------------------------------
    auto *r = app.add_subcommand("run", "execute a program with a fixed choice trail");
    std::string r_in, r_trail, r_pins, r_domain = "term";
    solver_opts r_solver;
    r->add_option("input", r_in, "program (.sir)")->required();
    r->add_option("--trail", r_trail, "comma-separated choice directions");
    r->add_option("--pin", r_pins, "pin symbolic inputs to comma-separated constants");
    r->add_option("--solver", r_solver.mode, "solver backend")
        ->check(CLI::IsMember({"auto", "brute", "ext"}));
    r->add_option("--solver-path", r_solver.path, "external solver command");
    r->add_option("--solver-timeout-ms", r_solver.timeout_ms, "per-query timeout");

    // ---- verify ----------------------------------------------------------
    auto *v = app.add_subcommand("verify", "explore all paths and check assertions");
    std::string v_in, v_domain = "term", v_dedup = "off", v_strategy = "dfs", v_report;
    solver_opts v_solver;
    explore_config vcfg;
    unsigned v_jobs = 1;
    bool v_no_replay = false;
    v->add_option("input", v_in, "program (.sir)")->required();
    v->add_option("--domain", v_domain, "abstract domain")
        ->check(CLI::IsMember({"term", "parity"}));
    v->add_option("--dedup", v_dedup, "state deduplication mode")
        ->check(CLI::IsMember({"off", "syntactic", "semantic"}));
    v->add_option("--strategy", v_strategy, "search order")->check(CLI::IsMember({"dfs", "bfs"}));
    v->add_option("--depth", vcfg.max_depth, "max choices per path");
    v->add_option("--states", vcfg.max_states, "max stored states");
    v->add_option("--time-ms", vcfg.time_budget_ms, "wall-clock budget");
    v->add_option("--jobs", v_jobs, "parallel exploration workers");
    v->add_option("--solver", v_solver.mode, "solver backend")
        ->check(CLI::IsMember({"auto", "brute", "ext"}));
    v->add_option("--solver-path", v_solver.path, "external solver command");
    v->add_option("--solver-timeout-ms", v_solver.timeout_ms, "per-query timeout");
    v->add_option("--report", v_report, "write the JSON report to this file");
    v->add_flag("--no-replay", v_no_replay, "skip counterexample replay");

    // ---- dump-smt ----------------------------------------------------------
    auto *d = app.add_subcommand("dump-smt", "print the final path condition as an SMT query");
    std::string d_in, d_trail, d_domain = "term", d_out = "-";
    d->add_option("input", d_in, "program (.sir)")->required();
    d->add_option("--trail", d_trail, "comma-separated choice directions");
    d->add_option("--domain", d_domain, "abstract domain")->check(CLI::IsMember({"term"}));
    d->add_option("--out,-o", d_out, "output path");

    // ---- replay -------------------------------------------------------------
    auto *rp = app.add_subcommand("replay", "re-run a counterexample from a report");
    std::string rp_in, rp_report;
    rp->add_option("input", rp_in, "the untransformed program (.sir)")->required();
    rp->add_option("--report", rp_report, "verification report (JSON)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        int code = app.exit(e);
        return code == 0 ? 0 : exit_usage;
    }

    // ---------------- transform ----------------
    if (t->parsed()) {
        std::string in = !t_in.empty() ? t_in : t_in_flag;
        if (in.empty()) {
            std::cerr << "symtrans transform: no input file\n";
            return exit_usage;
        }
        auto m = load_module(in);
        if (!m)
            return exit_usage;
        auto res = transform(*m, t_domain, &default_registry());
        if (!res.ok()) {
            std::cerr << "symtrans transform: " << in << ":\n" << join_diags(res.errors);
            return exit_usage;
        }
        if (!write_output(t_out, res.text)) {
            std::cerr << "symtrans transform: cannot write " << t_out << "\n";
            return exit_usage;
        }
        return exit_ok;
    }

    // ---------------- run ----------------
    if (r->parsed()) {
        auto m = load_module(r_in);
        if (!m)
            return exit_usage;
        std::string sdesc;
        auto sf = make_solver_factory(r_solver, sdesc);
        if (!sf) {
            std::cerr << "symtrans run: no external solver found\n";
            return exit_usage;
        }
        auto solver = sf();
        vm w(*m, &default_registry(), solver.get());
        if (!r_pins.empty()) {
            w.pins = parse_u64_list(r_pins);
            w.auto_choice = true;
        }
        machine_state st = w.initial_state();
        run_outcome out = drive(w, st, parse_u64_list(r_trail));
        for (auto &line : st.output)
            std::cout << line << "\n";
        if (!out.note.empty())
            std::cerr << "symtrans run: " << out.note << "\n";
        return out.exit_code;
    }

    // ---------------- verify ----------------
    if (v->parsed()) {
        auto m = load_module(v_in);
        if (!m)
            return exit_usage;
        vcfg.domain = v_domain;
        vcfg.dedup = v_dedup == "off"         ? dedup_mode::off
                     : v_dedup == "syntactic" ? dedup_mode::syntactic
                                              : dedup_mode::semantic;
        vcfg.strategy = v_strategy == "dfs" ? search_strategy::dfs : search_strategy::bfs;
        vcfg.jobs = v_jobs;

        auto res = transform(*m, v_domain, &default_registry());
        if (!res.ok()) {
            std::cerr << "symtrans verify: " << v_in << ":\n" << join_diags(res.errors);
            return exit_usage;
        }
        std::string sdesc;
        auto sf = make_solver_factory(v_solver, sdesc);
        if (!sf) {
            std::cerr << "symtrans verify: no external solver found\n";
            return exit_usage;
        }

        verdict vd = explore(*res.module, default_registry(), sf, vcfg);

        bool input_is_transformed = false;
        for (auto &fn : m->functions)
            for (auto &bb : fn.blocks)
                for (auto &in : bb.insts)
                    if (in.op == opcode::call && in.callee.rfind("a_", 0) == 0)
                        input_is_transformed = true;

        if (vd.viol && !v_no_replay && !input_is_transformed) {
            replay_result rr = replay(*m, *vd.viol);
            vd.viol->replay_ok = rr.ok;
            vd.viol->trace = rr.trace;
            if (!rr.ok)
                std::cerr << "symtrans verify: INTERNAL SOUNDNESS ERROR: counterexample "
                             "does not replay: "
                          << rr.message << "\n";
        }

        auto j = report_json(vd, v_in, vcfg);
        j["solver"] = sdesc;
        std::string doc = j.dump(2) + "\n";
        if (v_report.empty())
            std::cout << doc;
        else if (!write_output(v_report, doc)) {
            std::cerr << "symtrans verify: cannot write " << v_report << "\n";
            return exit_usage;
        }
        std::cerr << "verdict: " << j["verdict"].get<std::string>() << " (states "
                  << vd.stats.states_stored << ", solver calls " << vd.stats.solver_calls
                  << ", prunes " << vd.stats.prunes << ", " << vd.stats.wall_ms << " ms)\n";
        if (vd.k == verdict::kind::violation)
            return exit_violation;
        if (vd.k == verdict::kind::unknown)
            return exit_unknown;
        return exit_ok;
    }

    // ---------------- dump-smt ----------------
    if (d->parsed()) {
        auto m = load_module(d_in);
        if (!m)
            return exit_usage;
        auto res = transform(*m, d_domain, &default_registry());
        if (!res.ok()) {
            std::cerr << "symtrans dump-smt: " << d_in << ":\n" << join_diags(res.errors);
            return exit_usage;
        }
        brute_force_solver brute;
        vm w(*res.module, &default_registry(), &brute);
        machine_state st = w.initial_state();
        auto trail = parse_u64_list(d_trail);
        size_t cursor = 0;
        bool running = true;
        while (running) {
            vm_event ev = w.resume(st);
            switch (ev.k) {
                case vm_event::kind::need_choice:
                    if (cursor >= trail.size()) {
                        running = false;
                        break;
                    }
                    if (auto tr = w.provide_choice(st, uint32_t(trail[cursor++]))) {
                        std::cerr << "symtrans dump-smt: " << tr->message << "\n";
                        return exit_usage;
                    }
                    break;
                case vm_event::kind::abstract_assert: {
                    auto *dom = default_registry().by_id(ev.cond.domain);
                    if (dom) {
                        auto ctx = w.make_ctx(st);
                        dom->assume(ev.cond.payload, 1, ctx);
                    }
                    break;
                }
                case vm_event::kind::trapped:
                case vm_event::kind::exited:
                case vm_event::kind::assume_blocked:
                case vm_event::kind::assume_infeasible:
                case vm_event::kind::step_budget:
                    running = false;
                    break;
                default:
                    break;
            }
        }
        solver_query q;
        q.symbol_widths = st.symbols.widths;
        q.asserts = st.pc.all();
        q.want_model = true;
        std::string text = "(set-logic QF_BV)\n" + serialize_query(w.arena, q);
        if (!write_output(d_out, text)) {
            std::cerr << "symtrans dump-smt: cannot write " << d_out << "\n";
            return exit_usage;
        }
        return exit_ok;
    }

    // ---------------- replay ----------------
    if (rp->parsed()) {
        auto m = load_module(rp_in);
        if (!m)
            return exit_usage;
        auto text = read_file(rp_report);
        if (!text) {
            std::cerr << "symtrans replay: cannot read " << rp_report << "\n";
            return exit_usage;
        }
        nlohmann::json j = nlohmann::json::parse(*text, nullptr, false);
        std::string why;
        if (j.is_discarded() || !report_valid(j, &why)) {
            std::cerr << "symtrans replay: invalid report: " << why << "\n";
            return exit_usage;
        }
        if (j["verdict"] != "violation") {
            std::cerr << "symtrans replay: report has no counterexample (verdict "
                      << j["verdict"].get<std::string>() << ")\n";
            return exit_usage;
        }
        violation_info vi;
        vi.kind = j["violation"]["kind"].get<std::string>();
        auto &model = j["violation"]["model"];
        vi.model.assign(model.size(), 0);
        for (auto &[key, val] : model.items())
            vi.model[std::stoul(key.substr(1))] = val.get<uint64_t>();
        for (auto &c : j["violation"]["trail"])
            vi.trail.push_back({c["site"].get<std::string>(), c["dir"].get<uint32_t>(),
                                c["arity"].get<uint32_t>()});
        replay_result rr = replay(*m, vi);
        for (auto &line : rr.output)
            std::cout << line << "\n";
        std::cerr << "symtrans replay: " << rr.message << "\n";
        for (auto &step : rr.trace)
            std::cerr << "  " << step << "\n";
        if (rr.ok)
            return exit_ok;
        return rr.infeasible ? exit_usage : exit_unknown;
    }

    return exit_usage;
}
