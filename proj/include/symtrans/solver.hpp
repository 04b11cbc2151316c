#pragma once

#include <atomic>
#include <chrono>
#include <cstring>
#include <map>
#include <memory>
#include <optional>

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include "smtlib.hpp"
#include "term.hpp"

namespace symtrans
{

enum class sat_status : uint8_t { sat, unsat, unknown };

struct solver_answer
{
    sat_status status = sat_status::unknown;
    std::vector< uint64_t > model; // by symbol creation index, total when sat
    std::string reason;            // unknown only

    bool is_sat() const { return status == sat_status::sat; }
    bool is_unsat() const { return status == sat_status::unsat; }
    bool is_unknown() const { return status == sat_status::unknown; }
};

struct solver_backend
{
    virtual ~solver_backend() = default;
    virtual solver_answer check( const term_arena &ar, const solver_query &q ) = 0;
    virtual std::string name() const = 0;

    std::atomic< uint64_t > queries = 0;
};

/*
 * Exhaustive-enumeration oracle: sound and complete for up to 24 total
 * symbol bits. Conjuncts are flattened into dense postfix programs once per
 * query; a trapping evaluation (division by zero) rejects the assignment,
 * which agrees with SMT semantics because every division node is guarded by
 * a `divisor != 0` conjunct riding in the same query.
 */
struct brute_force_solver final : solver_backend
{
    static constexpr uint64_t max_total_bits = 24;

    std::string name() const override { return "brute"; }

    struct flat_node
    {
        term_op op;
        uint8_t width;
        uint8_t lhs_width;
        uint32_t lhs, rhs; // dense slot indexes
        uint64_t payload;
    };

    static void flatten( const term_arena &ar, const std::vector< term_id > &roots,
                         std::vector< flat_node > &prog, std::vector< uint32_t > &root_slots )
    {
        std::vector< term_id > order;
        {
            std::vector< term_id > stack = roots;
            std::vector< bool > seen( ar.size(), false );
            while ( !stack.empty() )
            {
                term_id id = stack.back();
                stack.pop_back();
                if ( id == no_term || seen[ id ] )
                    continue;
                seen[ id ] = true;
                order.push_back( id );
                stack.push_back( ar[ id ].lhs );
                stack.push_back( ar[ id ].rhs );
            }
        }
        std::sort( order.begin(), order.end() );
        std::unordered_map< term_id, uint32_t > slot;
        for ( term_id id : order )
        {
            const term_node &n = ar[ id ];
            flat_node f{ n.op, n.width, 0, 0, 0, n.payload };
            if ( n.lhs != no_term )
            {
                f.lhs = slot.at( n.lhs );
                f.lhs_width = ar[ n.lhs ].width;
            }
            if ( n.rhs != no_term )
                f.rhs = slot.at( n.rhs );
            slot[ id ] = uint32_t( prog.size() );
            prog.push_back( f );
        }
        for ( term_id r : roots )
            root_slots.push_back( slot.at( r ) );
    }

    // evaluates the flat program; false = trap (assignment rejected)
    static bool eval_flat( const std::vector< flat_node > &prog,
                           std::span< const uint64_t > assignment, std::vector< uint64_t > &vals )
    {
        for ( size_t i = 0; i < prog.size(); ++i )
        {
            const flat_node &n = prog[ i ];
            uint64_t a = n.lhs < vals.size() ? vals[ n.lhs ] : 0;
            uint64_t b = n.rhs < vals.size() ? vals[ n.rhs ] : 0;
            uint64_t r = 0;
            switch ( n.op )
            {
                case term_op::constant: r = n.payload; break;
                case term_op::symbol:
                    r = n.payload < assignment.size() ? assignment[ n.payload ] : 0;
                    break;
                case term_op::zext: r = bits::zext( a, n.lhs_width, n.width ); break;
                case term_op::sext: r = bits::sext( a, n.lhs_width, n.width ); break;
                case term_op::trunc: r = bits::trunc( a, n.width ); break;
                default:
                {
                    int w = term_is_cmp( n.op ) ? n.lhs_width : n.width;
                    auto v = fold_binary( n.op, a, b, w );
                    if ( !v )
                        return false;
                    r = *v;
                }
            }
            vals[ i ] = r;
        }
        return true;
    }

    solver_answer check( const term_arena &ar, const solver_query &q ) override
    {
        ++queries;
        uint64_t total_bits = 0;
        for ( auto w : q.symbol_widths )
            total_bits += w;
        if ( total_bits > max_total_bits )
            return { sat_status::unknown, {}, "brute-force bound exceeded (" +
                                                  std::to_string( total_bits ) + " symbol bits)" };

        std::vector< flat_node > prog;
        std::vector< uint32_t > roots;
        flatten( ar, q.asserts, prog, roots );
        std::vector< uint64_t > vals( prog.size() );
        std::vector< uint64_t > assignment( q.symbol_widths.size(), 0 );

        // assignments enumerate as a little-endian counter, symbol 0 fastest,
        // making the first (reported) model deterministic
        uint64_t count = 1ull << total_bits;
        for ( uint64_t c = 0;; ++c )
        {
            uint64_t rest = c;
            for ( size_t s = 0; s < assignment.size(); ++s )
            {
                assignment[ s ] = rest & bits::mask( q.symbol_widths[ s ] );
                rest >>= q.symbol_widths[ s ];
            }
            bool ok = eval_flat( prog, assignment, vals );
            if ( ok )
                for ( uint32_t r : roots )
                    ok = ok && vals[ r ] == 1;
            if ( ok )
                return { sat_status::sat, assignment, "" };
            if ( c + 1 == count )
                break;
        }
        return { sat_status::unsat, {}, "" };
    }
};

/*
 * External solver over the textual SMT-LIB2 protocol: one long-lived
 * process per backend instance, one (push 1) ... (pop 1) scope per query.
 * Works with any QF_BV solver reading from stdin (z3 -in, stp --SMTLIB2,
 * the bundled minismt).
 */
struct external_solver final : solver_backend
{
    std::vector< std::string > argv;
    int timeout_ms = 30000;

    pid_t pid = -1;
    int in_fd = -1;  // we write queries here
    int out_fd = -1; // solver answers
    std::string rbuf;
    bool preamble_sent = false;

    explicit external_solver( std::vector< std::string > cmd, int timeout = 30000 )
        : argv( std::move( cmd ) ), timeout_ms( timeout )
    {
    }

    ~external_solver() override { shutdown(); }

    std::string name() const override { return "external:" + ( argv.empty() ? "?" : argv[ 0 ] ); }

    void shutdown()
    {
        if ( in_fd >= 0 )
        {
            // best effort: ask politely, then reap
            ( void )!write( in_fd, "(exit)\n", 7 );
            close( in_fd );
            in_fd = -1;
        }
        if ( out_fd >= 0 )
        {
            close( out_fd );
            out_fd = -1;
        }
        if ( pid > 0 )
        {
            int st = 0;
            if ( waitpid( pid, &st, WNOHANG ) == 0 )
            {
                kill( pid, SIGKILL );
                waitpid( pid, &st, 0 );
            }
            pid = -1;
        }
        preamble_sent = false;
        rbuf.clear();
    }

    bool spawn( std::string &err )
    {
        int to_child[ 2 ], from_child[ 2 ];
        if ( pipe( to_child ) || pipe( from_child ) )
        {
            err = "pipe() failed";
            return false;
        }
        pid = fork();
        if ( pid < 0 )
        {
            err = "fork() failed";
            return false;
        }
        if ( pid == 0 )
        {
            dup2( to_child[ 0 ], 0 );
            dup2( from_child[ 1 ], 1 );
            int devnull = open( "/dev/null", O_WRONLY );
            if ( devnull >= 0 )
                dup2( devnull, 2 );
            close( to_child[ 0 ] );
            close( to_child[ 1 ] );
            close( from_child[ 0 ] );
            close( from_child[ 1 ] );
            std::vector< char * > cargv;
            for ( auto &a : argv )
                cargv.push_back( const_cast< char * >( a.c_str() ) );
            cargv.push_back( nullptr );
            execvp( cargv[ 0 ], cargv.data() );
            _exit( 127 );
        }
        close( to_child[ 0 ] );
        close( from_child[ 1 ] );
        in_fd = to_child[ 1 ];
        out_fd = from_child[ 0 ];
        signal( SIGPIPE, SIG_IGN );
        return true;
    }

    bool send( const std::string &s )
    {
        size_t off = 0;
        while ( off < s.size() )
        {
            ssize_t n = write( in_fd, s.data() + off, s.size() - off );
            if ( n <= 0 )
                return false;
            off += size_t( n );
        }
        return true;
    }

    // reads one line, honoring the per-query deadline
    std::optional< std::string > read_line( std::chrono::steady_clock::time_point deadline )
    {
        for ( ;; )
        {
            auto nl = rbuf.find( '\n' );
            if ( nl != std::string::npos )
            {
                std::string line = rbuf.substr( 0, nl );
                rbuf.erase( 0, nl + 1 );
                if ( !line.empty() && line.back() == '\r' )
                    line.pop_back();
                if ( line.empty() )
                    continue;
                return line;
            }
            auto now = std::chrono::steady_clock::now();
            if ( now >= deadline )
                return std::nullopt;
            struct pollfd pfd{ out_fd, POLLIN, 0 };
            int ms = int( std::chrono::duration_cast< std::chrono::milliseconds >( deadline - now ).count() );
            int pr = poll( &pfd, 1, std::max( 1, ms ) );
            if ( pr <= 0 )
                return std::nullopt;
            char buf[ 4096 ];
            ssize_t n = read( out_fd, buf, sizeof buf );
            if ( n <= 0 )
                return std::nullopt;
            rbuf.append( buf, size_t( n ) );
        }
    }

    // reads until parentheses balance (the get-value response)
    std::optional< std::string > read_sexpr( std::chrono::steady_clock::time_point deadline )
    {
        std::string acc;
        int depth = 0;
        bool started = false;
        for ( ;; )
        {
            auto line = read_line( deadline );
            if ( !line )
                return std::nullopt;
            acc += *line;
            acc += ' ';
            for ( char c : *line )
            {
                if ( c == '(' )
                {
                    ++depth;
                    started = true;
                }
                else if ( c == ')' )
                    --depth;
            }
            if ( started && depth <= 0 )
                return acc;
        }
    }

    static std::optional< uint64_t > parse_value_token( std::string_view t )
    {
        if ( t.size() > 2 && t[ 0 ] == '#' && t[ 1 ] == 'x' )
        {
            uint64_t v = 0;
            for ( char c : t.substr( 2 ) )
            {
                int d = c >= '0' && c <= '9'   ? c - '0'
                        : c >= 'a' && c <= 'f' ? c - 'a' + 10
                        : c >= 'A' && c <= 'F' ? c - 'A' + 10
                                               : -1;
                if ( d < 0 )
                    return std::nullopt;
                v = v << 4 | uint64_t( d );
            }
            return v;
        }
        if ( t.size() > 2 && t[ 0 ] == '#' && t[ 1 ] == 'b' )
        {
            uint64_t v = 0;
            for ( char c : t.substr( 2 ) )
            {
                if ( c != '0' && c != '1' )
                    return std::nullopt;
                v = v << 1 | uint64_t( c - '0' );
            }
            return v;
        }
        if ( t.size() > 2 && t.substr( 0, 2 ) == "bv" )
        {
            uint64_t v = 0;
            for ( char c : t.substr( 2 ) )
            {
                if ( c < '0' || c > '9' )
                    return std::nullopt;
                v = v * 10 + uint64_t( c - '0' );
            }
            return v;
        }
        return std::nullopt;
    }

    // extracts (sK value) pairs from a get-value response
    static bool parse_model( const std::string &resp, size_t nsyms, std::vector< uint64_t > &model )
    {
        model.assign( nsyms, 0 );
        std::vector< std::string > toks;
        std::string cur;
        for ( char c : resp )
        {
            if ( c == '(' || c == ')' || c == ' ' || c == '\t' )
            {
                if ( !cur.empty() )
                {
                    toks.push_back( cur );
                    cur.clear();
                }
            }
            else
                cur += c;
        }
        if ( !cur.empty() )
            toks.push_back( cur );

        size_t found = 0;
        for ( size_t i = 0; i < toks.size(); ++i )
        {
            if ( toks[ i ].size() < 2 || toks[ i ][ 0 ] != 's' )
                continue;
            bool digits = true;
            for ( char c : toks[ i ].substr( 1 ) )
                digits = digits && c >= '0' && c <= '9';
            if ( !digits )
                continue;
            size_t idx = std::stoul( toks[ i ].substr( 1 ) );
            if ( idx >= nsyms )
                continue;
            for ( size_t j = i + 1; j < toks.size() && j < i + 4; ++j )
                if ( auto v = parse_value_token( toks[ j ] ) )
                {
                    model[ idx ] = *v;
                    ++found;
                    break;
                }
        }
        return found == nsyms;
    }

    solver_answer check( const term_arena &ar, const solver_query &q ) override
    {
        ++queries;
        std::string err;
        if ( pid < 0 && !spawn( err ) )
            return { sat_status::unknown, {}, "solver spawn failed: " + err };

        auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds( timeout_ms );
        auto fail = [ & ]( const std::string &why ) -> solver_answer
        {
            shutdown();
            return { sat_status::unknown, {}, why };
        };

        if ( !preamble_sent )
        {
            if ( !send( "(set-logic QF_BV)\n" ) )
                return fail( "solver write failed" );
            preamble_sent = true;
        }

        solver_query body = q;
        body.want_model = false;
        std::string text = "(push 1)\n" + serialize_query( ar, body );
        if ( !send( text ) )
            return fail( "solver write failed" );

        auto line = read_line( deadline );
        if ( !line )
            return fail( "solver timeout or EOF" );
        // tolerate success markers and echoed blanks
        while ( line && ( *line == "success" ) )
            line = read_line( deadline );
        if ( !line )
            return fail( "solver timeout or EOF" );

        solver_answer ans;
        if ( *line == "sat" )
            ans.status = sat_status::sat;
        else if ( *line == "unsat" )
            ans.status = sat_status::unsat;
        else if ( *line == "unknown" )
        {
            ans.status = sat_status::unknown;
            ans.reason = "solver reported unknown";
        }
        else
            return fail( "unexpected solver output: " + *line );

        if ( ans.is_sat() && q.want_model && !q.symbol_widths.empty() )
        {
            if ( !send( smtlib_model_request( q ) ) )
                return fail( "solver write failed" );
            auto resp = read_sexpr( deadline );
            if ( !resp )
                return fail( "solver timeout reading model" );
            if ( !parse_model( *resp, q.symbol_widths.size(), ans.model ) )
                return fail( "could not parse solver model: " + *resp );
        }
        else if ( ans.is_sat() )
            ans.model.assign( q.symbol_widths.size(), 0 );

        if ( !send( "(pop 1)\n" ) )
            return fail( "solver write failed" );
        return ans;
    }

    static std::string smtlib_model_request( const solver_query &q )
    {
        return model_request_line( q.symbol_widths.size() );
    }
};

// caches answers keyed by the canonical query serialization
struct memo_solver final : solver_backend
{
    solver_backend &inner;
    std::unordered_map< std::string, solver_answer > cache;
    std::atomic< uint64_t > hits = 0;

    explicit memo_solver( solver_backend &b ) : inner( b ) {}

    std::string name() const override { return inner.name() + "+memo"; }

    solver_answer check( const term_arena &ar, const solver_query &q ) override
    {
        ++queries;
        std::string key = serialize_query( ar, q );
        auto it = cache.find( key );
        if ( it != cache.end() )
        {
            ++hits;
            return it->second;
        }
        solver_answer a = inner.check( ar, q );
        if ( !a.is_unknown() )
            cache.emplace( std::move( key ), a );
        return a;
    }
};

// does `model` satisfy every conjunct? (trap counts as falsified)
inline bool model_satisfies( const term_arena &ar, const std::vector< term_id > &conjuncts,
                             std::span< const uint64_t > model )
{
    for ( term_id c : conjuncts )
    {
        auto v = eval_term( ar, c, model );
        if ( !v || *v != 1 )
            return false;
    }
    return true;
}

enum class equiv_result : uint8_t { yes, no, unknown };

struct equiv_answer
{
    equiv_result result = equiv_result::unknown;
    std::vector< uint64_t > witness; // distinguishing model when result == no
    std::string reason;
};

// semantic equivalence of two path conditions with paired terms, symbols
// matched by creation order: yes iff A entails B, B entails A, and every
// paired term is provably equal under A /\ B
inline equiv_answer check_equiv( term_arena &ar, const std::vector< uint8_t > &symbol_widths,
                                 const std::vector< term_id > &pc_a,
                                 const std::vector< term_id > &pc_b,
                                 const std::vector< std::pair< term_id, term_id > > &pairs,
                                 solver_backend &backend )
{
    auto conj = [ & ]( const std::vector< term_id > &ts ) -> term_id
    {
        if ( ts.empty() )
            return ar.constant( 1, 1 );
        term_id acc = ts[ 0 ];
        for ( size_t i = 1; i < ts.size(); ++i )
            acc = ar.apply( term_op::band, acc, ts[ i ] );
        return acc;
    };

    auto run = [ & ]( std::vector< term_id > asserts ) -> solver_answer
    {
        solver_query q;
        q.symbol_widths = symbol_widths;
        q.asserts = std::move( asserts );
        q.want_model = true;
        return backend.check( ar, q );
    };

    // A /\ not B
    {
        std::vector< term_id > as = pc_a;
        as.push_back( ar.negate( conj( pc_b ) ) );
        auto r = run( std::move( as ) );
        if ( r.is_sat() )
            return { equiv_result::no, r.model, "A does not entail B" };
        if ( r.is_unknown() )
            return { equiv_result::unknown, {}, r.reason };
    }
    // B /\ not A
    {
        std::vector< term_id > as = pc_b;
        as.push_back( ar.negate( conj( pc_a ) ) );
        auto r = run( std::move( as ) );
        if ( r.is_sat() )
            return { equiv_result::no, r.model, "B does not entail A" };
        if ( r.is_unknown() )
            return { equiv_result::unknown, {}, r.reason };
    }
    // A /\ B /\ (some pair differs)
    if ( !pairs.empty() )
    {
        std::vector< term_id > diff;
        for ( auto &[ ta, tb ] : pairs )
            if ( ta != tb )
                diff.push_back( ar.apply( term_op::ne, ta, tb ) );
        if ( !diff.empty() )
        {
            std::vector< term_id > as = pc_a;
            as.insert( as.end(), pc_b.begin(), pc_b.end() );
            term_id any = diff[ 0 ];
            for ( size_t i = 1; i < diff.size(); ++i )
                any = ar.apply( term_op::bor, any, diff[ i ] );
            as.push_back( any );
            auto r = run( std::move( as ) );
            if ( r.is_sat() )
                return { equiv_result::no, r.model, "paired terms differ" };
            if ( r.is_unknown() )
                return { equiv_result::unknown, {}, r.reason };
        }
    }
    return { equiv_result::yes, {}, "" };
}

} // namespace symtrans
