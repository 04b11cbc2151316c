#pragma once

#include <condition_variable>
#include <deque>
#include <mutex>
#include <thread>

#include "rewrite.hpp"
#include "snapshot.hpp"
#include "solver.hpp"
#include "term_domain.hpp"
#include "vm.hpp"

namespace symtrans
{

enum class dedup_mode : uint8_t { off, syntactic, semantic };
enum class search_strategy : uint8_t { dfs, bfs };

struct explore_config
{
    std::string domain = "term";
    dedup_mode dedup = dedup_mode::off;
    search_strategy strategy = search_strategy::dfs;
    uint64_t max_depth = 10000;   // choices per path
    uint64_t max_states = 100000; // stored snapshots
    uint64_t time_budget_ms = 0;  // 0 = unlimited
    uint64_t step_limit = 2000000;
    unsigned jobs = 1;
    bool stop_on_violation = true;
    bool collect_paths = false;
};

struct explore_stats
{
    uint64_t states_stored = 0;
    uint64_t solver_calls = 0;
    uint64_t prunes = 0;
    uint64_t dedup_hits = 0;
    uint64_t paths_completed = 0;
    uint64_t blocked = 0;
    double wall_ms = 0;
    bool budget_hit = false;
    std::string budget_reason;
};

struct violation_info
{
    std::string kind; // "assert" or a trap description
    std::vector< uint64_t > model;
    std::vector< uint8_t > model_widths;
    std::vector< choice_rec > trail;
    std::vector< std::string > trace; // filled by replay
    std::vector< std::string > output;
    bool replay_ok = false;
};

struct verdict
{
    enum class kind : uint8_t { safe, violation, unknown };

    kind k = kind::unknown;
    std::optional< violation_info > viol;
    std::string unknown_reason;
    explore_stats stats;
    // (trail, violated?) pairs, recorded when collect_paths is set
    std::vector< std::pair< std::vector< choice_rec >, bool > > paths;
};

using solver_factory = std::function< std::unique_ptr< solver_backend >() >;

namespace detail
{

struct visited_set
{
    std::mutex mu;
    std::unordered_map< uint64_t, std::vector< std::shared_ptr< const state_image > > > buckets;

    std::vector< std::shared_ptr< const state_image > > candidates( uint64_t digest )
    {
        std::lock_guard lock( mu );
        auto it = buckets.find( digest );
        return it == buckets.end() ? std::vector< std::shared_ptr< const state_image > >{}
                                   : it->second;
    }

    void insert( uint64_t digest, std::shared_ptr< const state_image > img )
    {
        std::lock_guard lock( mu );
        buckets[ digest ].push_back( std::move( img ) );
    }

    size_t size()
    {
        std::lock_guard lock( mu );
        size_t n = 0;
        for ( auto &[ k, v ] : buckets )
            n += v.size();
        return n;
    }
};

struct frontier
{
    struct item
    {
        std::shared_ptr< const state_image > img;
        std::optional< uint32_t > direction;
    };

    std::mutex mu;
    std::condition_variable cv;
    std::deque< item > items;
    unsigned active = 0;
    bool stopped = false;
    search_strategy strategy = search_strategy::dfs;

    void push( item it )
    {
        {
            std::lock_guard lock( mu );
            items.push_back( std::move( it ) );
        }
        cv.notify_one();
    }

    // blocks until work arrives or the search drains/stops
    std::optional< item > pop()
    {
        std::unique_lock lock( mu );
        for ( ;; )
        {
            if ( stopped )
                return std::nullopt;
            if ( !items.empty() )
            {
                item it;
                if ( strategy == search_strategy::dfs )
                {
                    it = std::move( items.back() );
                    items.pop_back();
                }
                else
                {
                    it = std::move( items.front() );
                    items.pop_front();
                }
                ++active;
                return it;
            }
            if ( active == 0 )
                return std::nullopt;
            cv.wait( lock );
        }
    }

    void done()
    {
        {
            std::lock_guard lock( mu );
            --active;
        }
        cv.notify_all();
    }

    void stop()
    {
        {
            std::lock_guard lock( mu );
            stopped = true;
        }
        cv.notify_all();
    }
};

// collects the ordered abstract slots of a state for term pairing
inline std::vector< term_id > term_slots( machine_state &st, const domain_registry *reg )
{
    std::vector< term_id > out;
    visit_term_handles( st, reg, [ & ]( uint64_t &h ) { out.push_back( term_id( h ) ); } );
    // the path condition handles were appended last by visit order; keep
    // only register/shadow slots for pairing
    size_t pc_count = st.pc.entries.size() + st.pc.guards.size();
    out.resize( out.size() - pc_count );
    return out;
}

} // namespace detail

struct explorer
{
    const ir_module &transformed;
    const domain_registry &registry;
    solver_factory make_solver;
    explore_config cfg;

    detail::frontier front;
    detail::visited_set visited;

    std::mutex result_mu;
    verdict result;
    std::chrono::steady_clock::time_point t0;
    std::atomic< uint64_t > states_stored = 0;
    std::atomic< uint64_t > prunes = 0;
    std::atomic< uint64_t > dedup_hits = 0;
    std::atomic< uint64_t > paths_completed = 0;
    std::atomic< uint64_t > blocked = 0;
    std::atomic< uint64_t > solver_calls = 0;
    std::atomic< bool > unknown_flag = false;
    std::atomic< bool > budget_flag = false;
    std::string unknown_reason;
    std::atomic< bool > have_violation = false;

    explorer( const ir_module &m, const domain_registry &reg, solver_factory sf,
              explore_config c )
        : transformed( m ), registry( reg ), make_solver( std::move( sf ) ), cfg( std::move( c ) )
    {
        front.strategy = cfg.strategy;
    }

    void note_unknown( const std::string &why )
    {
        unknown_flag = true;
        std::lock_guard lock( result_mu );
        if ( unknown_reason.empty() )
            unknown_reason = why;
    }

    void note_budget( const std::string &why )
    {
        budget_flag = true;
        note_unknown( why );
    }

    bool time_exceeded() const
    {
        if ( !cfg.time_budget_ms )
            return false;
        auto dt = std::chrono::steady_clock::now() - t0;
        return std::chrono::duration_cast< std::chrono::milliseconds >( dt ).count() >=
               int64_t( cfg.time_budget_ms );
    }

    void record_path( const std::vector< choice_rec > &trail, bool violated )
    {
        if ( !cfg.collect_paths )
            return;
        std::lock_guard lock( result_mu );
        result.paths.emplace_back( trail, violated );
    }

    void record_violation( violation_info v )
    {
        bool first = !have_violation.exchange( true );
        record_path( v.trail, true );
        if ( first )
        {
            std::lock_guard lock( result_mu );
            result.viol = std::move( v );
        }
        if ( cfg.stop_on_violation )
            front.stop();
    }

    // one exploration worker: own VM, own solver process, shared frontier
    void worker()
    {
        vm w( transformed, &registry );
        auto inner = make_solver();
        memo_solver solver( *inner );
        w.solver = &solver;
        w.step_limit = cfg.step_limit;

        while ( auto item = front.pop() )
        {
            run_item( w, solver, *item );
            front.done();
            if ( time_exceeded() )
            {
                note_budget( "time budget exhausted" );
                front.stop();
            }
        }
        solver_calls += inner->queries.load();
    }

    solver_answer check_pc( vm &w, memo_solver &solver, machine_state &st, bool want_model )
    {
        solver_query q;
        q.symbol_widths = st.symbols.widths;
        q.asserts = st.pc.all();
        q.want_model = want_model;
        return solver.check( w.arena, q );
    }

    // true when the state is subsumed by an already-visited one
    bool is_seen( vm &w, memo_solver &solver, machine_state &st )
    {
        if ( cfg.dedup == dedup_mode::off )
            return false;

        state_image img = snapshot( w, st );
        auto cands = visited.candidates( img.digest );
        for ( auto &cand : cands )
        {
            if ( cand->concrete_blob != img.concrete_blob )
                continue; // digest collision
            machine_state other = restore( w, *cand );
            if ( !( other.symbols == st.symbols ) )
                continue;

            auto slots_a = detail::term_slots( st, &registry );
            auto slots_b = detail::term_slots( other, &registry );
            if ( slots_a.size() != slots_b.size() )
                continue;

            bool syntactic_eq = st.pc.entries == other.pc.entries &&
                                st.pc.guards == other.pc.guards && slots_a == slots_b;
            if ( syntactic_eq )
                return true;
            if ( cfg.dedup != dedup_mode::semantic )
                continue;

            std::vector< std::pair< term_id, term_id > > pairs;
            for ( size_t i = 0; i < slots_a.size(); ++i )
                pairs.emplace_back( slots_a[ i ], slots_b[ i ] );
            auto eq = check_equiv( w.arena, st.symbols.widths, st.pc.all(), other.pc.all(),
                                   pairs, solver );
            if ( eq.result == equiv_result::yes )
                return true;
            // solver timeout counts as fresh: sound, may revisit
        }
        visited.insert( img.digest, std::make_shared< state_image >( std::move( img ) ) );
        return false;
    }

    violation_info make_violation( machine_state &st, const std::string &kind,
                                   std::vector< uint64_t > model )
    {
        violation_info v;
        v.kind = kind;
        v.model = std::move( model );
        v.model_widths = st.symbols.widths;
        v.trail = st.trail;
        v.output = st.output;
        return v;
    }

    void run_item( vm &w, memo_solver &solver, const detail::frontier::item &item )
    {
        machine_state st = restore( w, *item.img );
        if ( item.direction )
            if ( auto trap_ev = w.provide_choice( st, *item.direction ) )
            {
                note_unknown( trap_ev->message );
                return;
            }

        for ( ;; )
        {
            vm_event ev = w.resume( st );
            switch ( ev.k )
            {
                case vm_event::kind::need_choice:
                {
                    if ( st.trail.size() >= cfg.max_depth )
                    {
                        note_budget( "depth bound reached" );
                        return;
                    }
                    if ( is_seen( w, solver, st ) )
                    {
                        ++dedup_hits;
                        return;
                    }
                    if ( states_stored.fetch_add( 1 ) + 1 > cfg.max_states )
                    {
                        note_budget( "state budget reached" );
                        return;
                    }
                    auto img = std::make_shared< const state_image >( snapshot( w, st ) );
                    // schedule every direction; dfs explores direction 0 first
                    for ( int d = int( ev.arity ) - 1; d >= 0; --d )
                        front.push( { img, uint32_t( d ) } );
                    return;
                }

                case vm_event::kind::assume_recorded:
                {
                    auto a = check_pc( w, solver, st, false );
                    if ( a.is_unsat() )
                    {
                        ++prunes;
                        return;
                    }
                    if ( a.is_unknown() )
                    {
                        note_unknown( "solver failed on feasibility: " + a.reason );
                        return;
                    }
                    continue;
                }

                case vm_event::kind::assume_infeasible:
                    ++prunes; // the domain itself refuted this direction
                    return;

                case vm_event::kind::assume_blocked:
                    ++blocked;
                    return;

                case vm_event::kind::abstract_assert:
                {
                    if ( !consider_assert( w, solver, st, ev ) )
                        return;
                    continue;
                }

                case vm_event::kind::abstract_div:
                {
                    if ( !consider_division( w, solver, st, ev ) )
                        return;
                    continue;
                }

                case vm_event::kind::div_unknown:
                    note_unknown( "abstract division is undecidable in this domain" );
                    continue;

                case vm_event::kind::trapped:
                {
                    if ( ev.trap == trap_kind::lower_failed ||
                         ev.trap == trap_kind::internal || ev.trap == trap_kind::bad_call )
                    {
                        note_unknown( ev.message );
                        return;
                    }
                    std::vector< uint64_t > model( st.symbols.count(), 0 );
                    if ( st.symbols.count() )
                    {
                        auto a = check_pc( w, solver, st, true );
                        if ( a.is_unknown() )
                        {
                            note_unknown( "solver failed on trap model: " + a.reason );
                            return;
                        }
                        if ( a.is_unsat() )
                        {
                            note_unknown( "internal: trapped on an infeasible path" );
                            return;
                        }
                        model = a.model;
                    }
                    record_violation( make_violation( st, std::string( trap_name( ev.trap ) ),
                                                      std::move( model ) ) );
                    return;
                }

                case vm_event::kind::exited:
                    ++paths_completed;
                    record_path( st.trail, false );
                    return;

                case vm_event::kind::step_budget:
                    note_budget( "step budget reached" );
                    return;
            }
        }
    }

    // abstract assert: report the failing side if feasible, then continue
    // down the passing side; returns false when the path ends here
    bool consider_assert( vm &w, memo_solver &solver, machine_state &st, const vm_event &ev )
    {
        auto *d = registry.by_id( ev.cond.domain );
        if ( !d || !d->handles_are_terms() )
        {
            // non-relational domain: cannot decide; never claim a violation
            note_unknown( "assert undecidable in domain " +
                          ( d ? d->domain_name : std::string( "?" ) ) );
            return true;
        }
        term_id cond = term_id( ev.cond.payload );

        solver_query fail_q;
        fail_q.symbol_widths = st.symbols.widths;
        fail_q.asserts = st.pc.all();
        fail_q.asserts.push_back( w.arena.negate( cond ) );
        fail_q.want_model = true;
        auto fail = solver.check( w.arena, fail_q );
        if ( fail.is_unknown() )
        {
            note_unknown( "solver failed on assert: " + fail.reason );
            return false;
        }
        if ( fail.is_sat() )
        {
            if ( !model_satisfies( w.arena, fail_q.asserts, fail.model ) )
            {
                note_unknown( "solver returned a bogus model" );
                return false;
            }
            record_violation( make_violation(
                st, std::string( trap_name( trap_kind::assert_failed ) ), fail.model ) );
            if ( cfg.stop_on_violation )
                return false;
        }
        else
            ++prunes; // the contradictory branch cannot exist

        solver_query pass_q;
        pass_q.symbol_widths = st.symbols.widths;
        pass_q.asserts = st.pc.all();
        pass_q.asserts.push_back( cond );
        pass_q.want_model = false;
        auto pass = solver.check( w.arena, pass_q );
        if ( pass.is_unknown() )
        {
            note_unknown( "solver failed on assert: " + pass.reason );
            return false;
        }
        if ( pass.is_unsat() )
            return false; // assert fails on every input reaching it
        st.pc.entries.push_back( cond );
        return true;
    }

    // abstract divisor: a feasible zero devisor is a definite trap; the
    // non-zero guard is already part of the path condition
    bool consider_division( vm &w, memo_solver &solver, machine_state &st, const vm_event &ev )
    {
        term_id divisor = term_id( ev.cond.payload );

        solver_query zero_q;
        zero_q.symbol_widths = st.symbols.widths;
        zero_q.asserts = st.pc.entries;
        // all guards except the one just appended for this division
        for ( size_t i = 0; i + 1 < st.pc.guards.size(); ++i )
            zero_q.asserts.push_back( st.pc.guards[ i ] );
        zero_q.asserts.push_back( w.arena.apply(
            term_op::eq, divisor, w.arena.constant( 0, w.arena[ divisor ].width ) ) );
        zero_q.want_model = true;
        auto zero = solver.check( w.arena, zero_q );
        if ( zero.is_unknown() )
        {
            note_unknown( "solver failed on division guard: " + zero.reason );
            return false;
        }
        if ( zero.is_sat() )
        {
            record_violation( make_violation( st, std::string( trap_name( trap_kind::div_by_zero ) ),
                                              zero.model ) );
            if ( cfg.stop_on_violation )
                return false;
        }

        auto cont = check_pc( w, solver, st, false );
        if ( cont.is_unknown() )
        {
            note_unknown( "solver failed on feasibility: " + cont.reason );
            return false;
        }
        if ( cont.is_unsat() )
        {
            ++prunes;
            return false; // divisor is always zero here
        }
        return true;
    }

    verdict run()
    {
        t0 = std::chrono::steady_clock::now();
        {
            vm w0( transformed, &registry );
            machine_state init = w0.initial_state();
            front.push( { std::make_shared< const state_image >( snapshot( w0, init ) ),
                          std::nullopt } );
            states_stored = 1;
        }

        unsigned jobs = std::max( 1u, cfg.jobs );
        if ( jobs == 1 )
            worker();
        else
        {
            std::vector< std::thread > pool;
            for ( unsigned i = 0; i < jobs; ++i )
                pool.emplace_back( [ this ] { worker(); } );
            for ( auto &t : pool )
                t.join();
        }

        auto dt = std::chrono::steady_clock::now() - t0;
        result.stats.wall_ms =
            double( std::chrono::duration_cast< std::chrono::microseconds >( dt ).count() ) / 1000.0;
        result.stats.states_stored = states_stored;
        result.stats.prunes = prunes;
        result.stats.dedup_hits = dedup_hits;
        result.stats.paths_completed = paths_completed;
        result.stats.blocked = blocked;
        result.stats.solver_calls = solver_calls;
        result.stats.budget_hit = budget_flag;
        result.stats.budget_reason = unknown_reason;

        if ( have_violation )
            result.k = verdict::kind::violation;
        else if ( unknown_flag )
        {
            result.k = verdict::kind::unknown;
            result.unknown_reason = unknown_reason;
        }
        else
            result.k = verdict::kind::safe;
        return result;
    }
};

inline verdict explore( const ir_module &transformed, const domain_registry &reg,
                        solver_factory sf, const explore_config &cfg )
{
    explorer e( transformed, reg, std::move( sf ), cfg );
    return e.run();
}

// -------------------------------------------------------------- replay

struct replay_result
{
    bool ok = false;
    bool infeasible = false; // a concrete assume failed: a pruned-branch trail
    std::string message;
    std::vector< std::string > trace; // "site=dir" branch decisions
    std::vector< std::string > output;
};

// runs the untransformed program with @sym returning model values in
// creation order; the violation must reproduce concretely
inline replay_result replay( const ir_module &untransformed, const violation_info &v,
                             uint64_t step_limit = 10000000 )
{
    replay_result r;
    vm w( untransformed );
    w.step_limit = step_limit;
    w.input_provider = [ & ]( uint32_t idx, int width ) -> uint64_t
    {
        return idx < v.model.size() ? bits::trunc( v.model[ idx ], width ) : 0;
    };
    w.branch_trace = [ & ]( const std::string &site, int dir )
    { r.trace.push_back( site + "=" + std::to_string( dir ) ); };

    machine_state st = w.initial_state();
    size_t cursor = 0;
    for ( ;; )
    {
        vm_event ev = w.resume( st );
        switch ( ev.k )
        {
            case vm_event::kind::need_choice:
            {
                // consume the next user-choice entry of the recorded trail
                while ( cursor < v.trail.size() && v.trail[ cursor ].site != ev.site )
                    ++cursor;
                if ( cursor >= v.trail.size() )
                {
                    r.message = "replay divergence: no trail entry for choice site " + ev.site;
                    return r;
                }
                uint32_t dir = v.trail[ cursor++ ].direction;
                if ( auto trap_ev = w.provide_choice( st, dir ) )
                {
                    r.message = "replay divergence: " + trap_ev->message;
                    return r;
                }
                continue;
            }
            case vm_event::kind::assume_blocked:
                r.infeasible = true;
                r.message = "trail is infeasible: a concrete assume failed during replay";
                r.output = st.output;
                return r;
            case vm_event::kind::trapped:
                r.output = st.output;
                if ( std::string( trap_name( ev.trap ) ) == v.kind )
                {
                    r.ok = true;
                    r.message = "violation reproduced: " + v.kind;
                }
                else
                    r.message = "replay divergence: expected " + v.kind + ", got " + ev.message;
                return r;
            case vm_event::kind::exited:
                r.output = st.output;
                r.message = "replay divergence: program exited normally with code " +
                            std::to_string( ev.exit_code );
                return r;
            case vm_event::kind::step_budget:
                r.message = "replay divergence: step budget exhausted";
                return r;
            default:
                r.message = "replay divergence: unexpected abstract event";
                return r;
        }
    }
}

} // namespace symtrans
