#pragma once

#include <functional>
#include <map>

#include "domain.hpp"
#include "ir.hpp"
#include "validate.hpp"

namespace symtrans
{

enum class trap_kind : uint8_t
{
    div_by_zero, out_of_bounds, shadow_type_mismatch, shadow_partial_access,
    invalid_choice, assert_failed, lower_failed, no_input_provider, bad_call, internal,
};

inline std::string_view trap_name( trap_kind k )
{
    switch ( k )
    {
        case trap_kind::div_by_zero: return "division by zero";
        case trap_kind::out_of_bounds: return "out-of-bounds memory access";
        case trap_kind::shadow_type_mismatch: return "dynamic type error on thaw";
        case trap_kind::shadow_partial_access: return "partial access to a frozen value";
        case trap_kind::invalid_choice: return "invalid direction from choice oracle";
        case trap_kind::assert_failed: return "assertion failed";
        case trap_kind::lower_failed: return "lower failed";
        case trap_kind::no_input_provider: return "symbolic input without a provider";
        case trap_kind::bad_call: return "malformed call";
        case trap_kind::internal: return "internal error";
    }
    return "?";
}

struct choice_rec
{
    std::string site;
    uint32_t direction = 0;
    uint32_t arity = 0;

    friend bool operator==( const choice_rec &, const choice_rec & ) = default;
};

struct segment
{
    std::vector< uint8_t > bytes;
    bool alive = true;
    uint32_t owner_frame = 0;

    friend bool operator==( const segment &, const segment & ) = default;
};

struct shadow_entry
{
    uint32_t size = 0;
    uint8_t domain = 0;
    vtype stype;
    uint64_t frozen = 0;

    friend bool operator==( const shadow_entry &, const shadow_entry & ) = default;
};

struct frame
{
    uint32_t fn = 0;
    uint32_t block = 0, inst = 0;
    std::vector< abstract_value > regs;
    uint32_t ret_reg = no_reg;

    friend bool operator==( const frame &, const frame & ) = default;
};

struct machine_state
{
    std::vector< frame > stack;
    std::vector< segment > segments;
    std::map< std::pair< uint32_t, uint32_t >, shadow_entry > shadow;
    domain_state dstate;
    path_condition pc;
    symbol_table symbols;
    std::vector< choice_rec > trail;
    std::vector< std::string > output;
    uint64_t steps = 0;
    bool halted = false;

    friend bool operator==( const machine_state &, const machine_state & ) = default;
};

struct vm_event
{
    enum class kind : uint8_t
    {
        need_choice,       // paused at @choose; call provide_choice, then resume
        assume_recorded,   // constraint appended; a feasibility check point
        assume_infeasible, // the domain refuted this direction outright
        assume_blocked,    // concrete assume failed: benign end of path
        abstract_assert,   // undetermined abstract assert; embedder decides
        abstract_div,      // division with abstract divisor; guard appended
        div_unknown,       // abstract divisor in a domain that cannot track it
        exited,
        trapped,
        step_budget,
    };

    kind k = kind::exited;
    std::string site;
    uint32_t arity = 0;
    abstract_value cond;     // abstract_assert / abstract_div divisor
    uint64_t exit_code = 0;
    trap_kind trap = trap_kind::internal;
    std::string message;
};

// pointers pack (segment + 1) in the high half, byte offset in the low half
inline uint64_t make_ptr( uint32_t seg, uint32_t off )
{
    return ( uint64_t( seg ) + 1 ) << 32 | off;
}
inline uint32_t ptr_seg( uint64_t p ) { return uint32_t( p >> 32 ) - 1; }
inline uint32_t ptr_off( uint64_t p ) { return uint32_t( p ); }

/*
 * Domain-agnostic interpreter. The VM executes concrete instructions
 * directly and resolves a_* call targets against the registered domain
 * descriptors; everything the verification layer needs to know surfaces
 * as events (the four interface points: choice, freeze/thaw, feasibility,
 * state identity via snapshots).
 */
struct vm
{
    const ir_module &mod;
    const domain_registry *registry = nullptr;
    solver_backend *solver = nullptr;
    term_arena arena;

    // embedder hooks
    std::function< uint64_t( uint32_t index, int width ) > input_provider; // untransformed @sym
    std::vector< uint64_t > pins;         // pin inputs to constants (harness hook)
    bool auto_choice = false;             // resolve choices whose assume cond is decided
    std::function< void( const std::string &, int ) > branch_trace;
    // observation hook, fired before each instruction executes
    std::function< void( const machine_state &, const frame &, const instruction & ) > on_step;
    uint64_t step_limit = 0;

    explicit vm( const ir_module &m, const domain_registry *reg = nullptr,
                 solver_backend *slv = nullptr )
        : mod( m ), registry( reg ), solver( slv )
    {
    }

    // ---- setup ---------------------------------------------------------

    uint32_t fn_index( std::string_view name ) const
    {
        for ( uint32_t i = 0; i < mod.functions.size(); ++i )
            if ( mod.functions[ i ].name == name )
                return i;
        return no_block;
    }

    machine_state initial_state() const
    {
        machine_state st;
        uint32_t mi = fn_index( "main" );
        if ( mi == no_block )
            return st; // resume() traps immediately on empty stack
        frame f;
        f.fn = mi;
        f.regs.assign( mod.functions[ mi ].reg_names.size(), abstract_value{} );
        st.stack.push_back( std::move( f ) );
        return st;
    }

    // ---- lifter cache ---------------------------------------------------

    struct lifter_key
    {
        uint8_t kind; // 0 binop, 1 icmp, 2 cast
        opcode op;
        icmp_pred pred;
        uint8_t w, w2, dom;
        bool operator<( const lifter_key &o ) const
        {
            return std::tie( kind, op, pred, w, w2, dom ) <
                   std::tie( o.kind, o.op, o.pred, o.w, o.w2, o.dom );
        }
    };
    std::map< lifter_key, lifter > lifters;

    lifter &lifter_for( const callee_info &ci, domain_descriptor &d )
    {
        lifter_key key{ uint8_t( ci.kind == callee_kind::a_icmp ? 1
                                 : ci.kind == callee_kind::a_cast ? 2
                                                                  : 0 ),
                        ci.op, ci.pred, ci.width, ci.width_to, d.id };
        auto it = lifters.find( key );
        if ( it != lifters.end() )
            return it->second;
        lifter l = ci.kind == callee_kind::a_icmp
                       ? synthesize_lifter_icmp( ci.pred, ci.width, d )
                       : ci.kind == callee_kind::a_cast
                             ? synthesize_lifter_cast( ci.op, ci.width, ci.width_to, d )
                             : synthesize_lifter_binary( ci.op, ci.width, d );
        return lifters.emplace( key, l ).first->second;
    }

    // ---- memory ---------------------------------------------------------

    bool mem_range_ok( const machine_state &st, uint64_t ptr, uint32_t size ) const
    {
        if ( ptr == 0 )
            return false;
        uint32_t seg = ptr_seg( ptr ), off = ptr_off( ptr );
        if ( seg >= st.segments.size() || !st.segments[ seg ].alive )
            return false;
        return uint64_t( off ) + size <= st.segments[ seg ].bytes.size();
    }

    static uint64_t read_bytes( const machine_state &st, uint64_t ptr, uint32_t size )
    {
        uint32_t seg = ptr_seg( ptr ), off = ptr_off( ptr );
        uint64_t v = 0;
        for ( uint32_t i = 0; i < size; ++i )
            v |= uint64_t( st.segments[ seg ].bytes[ off + i ] ) << ( 8 * i );
        return v;
    }

    static void write_bytes( machine_state &st, uint64_t ptr, uint32_t size, uint64_t v )
    {
        uint32_t seg = ptr_seg( ptr ), off = ptr_off( ptr );
        for ( uint32_t i = 0; i < size; ++i )
            st.segments[ seg ].bytes[ off + i ] = uint8_t( v >> ( 8 * i ) );
    }

    // shadow entries intersecting [off, off+size) in `seg`
    template< typename F >
    static void for_overlaps( machine_state &st, uint32_t seg, uint32_t off, uint32_t size, F f )
    {
        uint32_t from = off >= 8 ? off - 8 : 0;
        auto it = st.shadow.lower_bound( { seg, from } );
        while ( it != st.shadow.end() && it->first.first == seg && it->first.second < off + size )
        {
            auto next = std::next( it );
            if ( it->first.second + it->second.size > off )
                f( it );
            it = next;
        }
    }

    static void evict_overlaps( machine_state &st, uint32_t seg, uint32_t off, uint32_t size )
    {
        for_overlaps( st, seg, off, size,
                      [ & ]( auto it ) { st.shadow.erase( it ); } );
    }

    static bool has_overlap( machine_state &st, uint32_t seg, uint32_t off, uint32_t size )
    {
        bool any = false;
        for_overlaps( st, seg, off, size, [ & ]( auto ) { any = true; } );
        return any;
    }

    // ---- site naming ----------------------------------------------------

    std::string site_of( const machine_state &st, const frame &f, uint32_t inst_idx ) const
    {
        const function &fn = mod.functions[ f.fn ];
        const basic_block &bb = fn.blocks[ f.block ];
        std::string base = fn.site_origin() + ":" + bb.label;
        // a choose feeding the block's assume+branch tail is the branch site;
        // other chooses get a per-block ordinal
        if ( inst_idx + 1 < bb.insts.size() )
        {
            const instruction &nx = bb.insts[ inst_idx + 1 ];
            if ( nx.op == opcode::call && nx.ci.kind == callee_kind::a_assume &&
                 nx.args.size() == 2 && nx.args[ 1 ].is_reg() &&
                 nx.args[ 1 ].reg == bb.insts[ inst_idx ].result )
                return base;
        }
        int ordinal = 0;
        for ( uint32_t i = 0; i < inst_idx; ++i )
            if ( bb.insts[ i ].op == opcode::call && bb.insts[ i ].ci.kind == callee_kind::choose )
                ++ordinal;
        ( void )st;
        return base + ":c" + std::to_string( ordinal );
    }

    // ---- event helpers --------------------------------------------------

    static vm_event ev_trap( machine_state &st, trap_kind k, std::string msg = "" )
    {
        st.halted = true;
        vm_event e;
        e.k = vm_event::kind::trapped;
        e.trap = k;
        e.message = msg.empty() ? std::string( trap_name( k ) ) : msg;
        return e;
    }

    static vm_event ev( vm_event::kind k )
    {
        vm_event e;
        e.k = k;
        return e;
    }

    // ---- stepping -------------------------------------------------------

    exec_ctx make_ctx( machine_state &st )
    {
        return exec_ctx{ arena, st.symbols, st.pc, st.dstate, solver };
    }

    abstract_value value_of( const frame &f, const operand &o ) const
    {
        if ( o.is_reg() )
            return f.regs[ o.reg ];
        return abstract_value::concrete( o.imm, o.type );
    }

    // enters `to` handling phi nodes atomically; returns first non-phi index
    void enter_block( frame &f, uint32_t to )
    {
        const function &fn = mod.functions[ f.fn ];
        uint32_t from = f.block;
        const basic_block &bb = fn.blocks[ to ];
        std::vector< std::pair< uint32_t, abstract_value > > updates;
        uint32_t i = 0;
        for ( ; i < bb.insts.size() && bb.insts[ i ].op == opcode::phi; ++i )
        {
            const instruction &phi = bb.insts[ i ];
            for ( const phi_in &pi : phi.incoming )
                if ( pi.block == from )
                    updates.emplace_back( phi.result, value_of( f, pi.value ) );
        }
        for ( auto &[ r, v ] : updates )
            f.regs[ r ] = v;
        f.block = to;
        f.inst = i;
    }

    // supplies the direction for the @choose the state is paused at;
    // a non-empty result is an invalid_choice trap
    std::optional< vm_event > provide_choice( machine_state &st, uint32_t direction )
    {
        frame &f = st.stack.back();
        const instruction &in = mod.functions[ f.fn ].blocks[ f.block ].insts[ f.inst ];
        abstract_value n = value_of( f, in.args[ 0 ] );
        uint32_t arity = uint32_t( n.payload );
        if ( direction >= arity )
            return ev_trap( st, trap_kind::invalid_choice,
                            "direction " + std::to_string( direction ) + " at arity " +
                                std::to_string( arity ) );
        st.trail.push_back( { site_of( st, f, f.inst ), direction, arity } );
        f.regs[ in.result ] = abstract_value::concrete( direction, t_int( 32 ) );
        ++f.inst;
        return std::nullopt;
    }

    // peeks whether the choose at (f.block, f.inst) is decided by its assume
    std::optional< uint32_t > decided_choice( machine_state &st, const frame &f )
    {
        const basic_block &bb = mod.functions[ f.fn ].blocks[ f.block ];
        uint32_t i = f.inst;
        if ( i + 1 >= bb.insts.size() )
            return std::nullopt;
        const instruction &nx = bb.insts[ i + 1 ];
        if ( !( nx.op == opcode::call && nx.ci.kind == callee_kind::a_assume &&
                nx.args.size() == 2 && nx.args[ 1 ].is_reg() &&
                nx.args[ 1 ].reg == bb.insts[ i ].result ) )
            return std::nullopt;
        abstract_value cond = value_of( f, nx.args[ 0 ] );
        if ( cond.is_concrete() )
            return uint32_t( cond.payload & 1 );
        if ( registry )
            if ( auto *d = registry->by_id( cond.domain ) )
            {
                auto ctx = make_ctx( st );
                switch ( d->decide_i1( cond.payload, ctx ) )
                {
                    case decided::is_true: return 1;
                    case decided::is_false: return 0;
                    case decided::undetermined: break;
                }
            }
        return std::nullopt;
    }

    vm_event resume( machine_state &st )
    {
        if ( st.halted )
            return ev_trap( st, trap_kind::internal, "resume on a halted state" );
        if ( st.stack.empty() )
            return ev_trap( st, trap_kind::internal, "no @main() -> i32 in module" );

        for ( ;; )
        {
            if ( step_limit && st.steps >= step_limit )
            {
                vm_event e = ev( vm_event::kind::step_budget );
                e.message = "step budget exhausted";
                return e;
            }

            frame &f = st.stack.back();
            const function &fn = mod.functions[ f.fn ];
            const basic_block &bb = fn.blocks[ f.block ];
            const instruction &in = bb.insts[ f.inst ];

            // pause *before* a @choose so snapshots land on the choice point
            if ( in.op == opcode::call && in.ci.kind == callee_kind::choose )
            {
                abstract_value n = value_of( f, in.args[ 0 ] );
                if ( !n.is_concrete() )
                    return ev_trap( st, trap_kind::bad_call, "@choose arity must be concrete" );
                if ( auto_choice )
                    if ( auto d = decided_choice( st, f ) )
                    {
                        ++st.steps;
                        if ( auto pe = provide_choice( st, *d ) )
                            return *pe;
                        continue;
                    }
                vm_event e = ev( vm_event::kind::need_choice );
                e.site = site_of( st, f, f.inst );
                e.arity = uint32_t( n.payload );
                return e;
            }

            ++st.steps;
            if ( on_step )
                on_step( st, f, in );
            vm_event e;
            if ( step_instruction( st, f, in, e ) )
                return e;
        }
    }

private:
    // returns true when an event must surface; the instruction pointer has
    // already moved past the instruction in every non-trap case
    bool step_instruction( machine_state &st, frame &f, const instruction &in, vm_event &out )
    {
        const function &fn = mod.functions[ f.fn ];

        auto trap = [ & ]( trap_kind k, std::string msg = "" )
        {
            out = ev_trap( st, k, std::move( msg ) );
            return true;
        };

        auto set_reg = [ & ]( abstract_value v )
        {
            if ( in.result != no_reg )
                f.regs[ in.result ] = v;
        };

        if ( is_binop( in.op ) )
        {
            abstract_value a = value_of( f, in.args[ 0 ] ), b = value_of( f, in.args[ 1 ] );
            auto r = fold_binary( term_op_of( in.op ), a.payload, b.payload,
                                  in.args[ 0 ].type.bits );
            if ( !r )
                return trap( trap_kind::div_by_zero );
            set_reg( abstract_value::concrete( *r, in.result_type ) );
            ++f.inst;
            return false;
        }

        switch ( in.op )
        {
            case opcode::icmp:
            {
                abstract_value a = value_of( f, in.args[ 0 ] ), b = value_of( f, in.args[ 1 ] );
                auto r = fold_binary( term_op_of( in.pred ), a.payload, b.payload,
                                      in.args[ 0 ].type.bits );
                set_reg( abstract_value::concrete( *r, t_i1 ) );
                ++f.inst;
                return false;
            }
            case opcode::zext:
            case opcode::sext:
            case opcode::trunc:
            {
                abstract_value a = value_of( f, in.args[ 0 ] );
                int fw = in.args[ 0 ].type.bits, tw = in.cast_to.bits;
                uint64_t v = in.op == opcode::zext   ? bits::zext( a.payload, fw, tw )
                             : in.op == opcode::sext ? bits::sext( a.payload, fw, tw )
                                                     : bits::trunc( a.payload, tw );
                set_reg( abstract_value::concrete( v, in.cast_to ) );
                ++f.inst;
                return false;
            }
            case opcode::alloca_:
            {
                segment s;
                s.bytes.assign( in.alloc.byte_size(), 0 );
                s.owner_frame = uint32_t( st.stack.size() - 1 );
                st.segments.push_back( std::move( s ) );
                set_reg( abstract_value::concrete(
                    make_ptr( uint32_t( st.segments.size() - 1 ), 0 ), t_ptr ) );
                ++f.inst;
                return false;
            }
            case opcode::load:
            {
                abstract_value p = value_of( f, in.args[ 0 ] );
                uint32_t size = uint32_t( in.result_type.byte_size() );
                if ( !mem_range_ok( st, p.payload, size ) )
                    return trap( trap_kind::out_of_bounds );
                if ( has_overlap( st, ptr_seg( p.payload ), ptr_off( p.payload ), size ) )
                    return trap( trap_kind::shadow_partial_access,
                                 "concrete load from frozen memory" );
                uint64_t v = read_bytes( st, p.payload, size );
                if ( in.result_type.is_int() )
                    v = bits::trunc( v, in.result_type.bits );
                set_reg( abstract_value::concrete( v, in.result_type ) );
                ++f.inst;
                return false;
            }
            case opcode::store:
            {
                abstract_value v = value_of( f, in.args[ 0 ] );
                abstract_value p = value_of( f, in.args[ 1 ] );
                uint32_t size = uint32_t( in.args[ 0 ].type.byte_size() );
                if ( !mem_range_ok( st, p.payload, size ) )
                    return trap( trap_kind::out_of_bounds );
                evict_overlaps( st, ptr_seg( p.payload ), ptr_off( p.payload ), size );
                write_bytes( st, p.payload, size, v.payload );
                ++f.inst;
                return false;
            }
            case opcode::ptradd:
            {
                abstract_value base = value_of( f, in.args[ 0 ] );
                abstract_value off = value_of( f, in.args[ 1 ] );
                // offsets are segment-local; wrap arithmetic in the low half only
                uint64_t p = ( base.payload & ~0xffffffffull ) |
                             uint32_t( ptr_off( base.payload ) + uint32_t( off.payload ) );
                set_reg( abstract_value::concrete( p, t_ptr ) );
                ++f.inst;
                return false;
            }
            case opcode::br:
            {
                uint32_t to = in.target;
                if ( in.is_cond_br() )
                {
                    abstract_value c = value_of( f, in.args[ 0 ] );
                    int dir = int( c.payload & 1 );
                    to = dir ? in.target : in.target_false;
                    if ( branch_trace )
                        branch_trace( fn.site_origin() + ":" +
                                          fn.blocks[ f.block ].label,
                                      dir );
                }
                enter_block( f, to );
                return false;
            }
            case opcode::ret:
            {
                std::optional< abstract_value > rv;
                if ( !in.args.empty() )
                    rv = value_of( f, in.args[ 0 ] );
                uint32_t dying = uint32_t( st.stack.size() - 1 );
                for ( auto &seg : st.segments )
                    if ( seg.alive && seg.owner_frame == dying )
                        seg.alive = false;
                uint32_t ret_reg = f.ret_reg;
                st.stack.pop_back();
                if ( st.stack.empty() )
                {
                    st.halted = true;
                    out = ev( vm_event::kind::exited );
                    out.exit_code = rv ? rv->payload : 0;
                    return true;
                }
                if ( ret_reg != no_reg )
                    st.stack.back().regs[ ret_reg ] = *rv;
                return false;
            }
            case opcode::phi:
                // phis are consumed on block entry; stepping onto one means
                // the edge handling skipped it
                return trap( trap_kind::internal, "phi executed sequentially" );
            case opcode::call:
                return step_call( st, f, in, out );
            default:
                return trap( trap_kind::internal, "unhandled opcode" );
        }
    }

    bool step_call( machine_state &st, frame &f, const instruction &in, vm_event &out )
    {
        auto trap = [ & ]( trap_kind k, std::string msg = "" )
        {
            out = ev_trap( st, k, std::move( msg ) );
            return true;
        };
        auto set_reg = [ & ]( abstract_value v )
        {
            if ( in.result != no_reg )
                f.regs[ in.result ] = v;
        };
        auto domain_of = [ & ]( const std::string &name ) -> domain_descriptor *
        {
            return registry ? registry->find( name ) : nullptr;
        };

        const callee_info &ci = in.ci;
        switch ( ci.kind )
        {
            case callee_kind::user:
            {
                uint32_t ci_fn = fn_index( in.callee );
                if ( ci_fn == no_block )
                    return trap( trap_kind::bad_call, "unknown function @" + in.callee );
                frame nf;
                nf.fn = ci_fn;
                nf.regs.assign( mod.functions[ ci_fn ].reg_names.size(), abstract_value{} );
                for ( size_t i = 0; i < in.args.size(); ++i )
                    nf.regs[ i ] = value_of( f, in.args[ i ] );
                nf.ret_reg = in.result;
                ++f.inst;
                st.stack.push_back( std::move( nf ) );
                return false;
            }

            case callee_kind::sym:
            {
                uint32_t idx = st.symbols.fresh( ci.width );
                uint64_t v;
                if ( !pins.empty() )
                    v = idx < pins.size() ? pins[ idx ] : 0;
                else if ( input_provider )
                    v = input_provider( idx, ci.width );
                else
                    return trap( trap_kind::no_input_provider );
                set_reg( abstract_value::concrete( v, t_int( ci.width ) ) );
                ++f.inst;
                return false;
            }

            case callee_kind::choose:
                return trap( trap_kind::internal, "choose must pause" );

            case callee_kind::assume_:
            {
                abstract_value c = value_of( f, in.args[ 0 ] );
                ++f.inst;
                if ( !( c.payload & 1 ) )
                {
                    st.halted = true;
                    out = ev( vm_event::kind::assume_blocked );
                    return true;
                }
                return false;
            }

            case callee_kind::assert_:
            {
                abstract_value c = value_of( f, in.args[ 0 ] );
                if ( !( c.payload & 1 ) )
                    return trap( trap_kind::assert_failed );
                ++f.inst;
                return false;
            }

            case callee_kind::lower:
            {
                set_reg( value_of( f, in.args[ 0 ] ) );
                ++f.inst;
                return false;
            }

            case callee_kind::print:
            {
                abstract_value v = value_of( f, in.args[ 0 ] );
                st.output.push_back( std::to_string( bits::trunc( v.payload, ci.width ) ) );
                ++f.inst;
                return false;
            }

            case callee_kind::a_sym:
            {
                if ( !pins.empty() )
                {
                    uint32_t idx = st.symbols.fresh( ci.width );
                    uint64_t v = idx < pins.size() ? pins[ idx ] : 0;
                    set_reg( abstract_value::concrete( v, t_int( ci.width ) ) );
                    ++f.inst;
                    return false;
                }
                auto *d = domain_of( ci.domain );
                if ( !d )
                    return trap( trap_kind::bad_call, "domain not registered: " + ci.domain );
                auto ctx = make_ctx( st );
                handle_t h = d->fresh_input( ci.width, ctx );
                set_reg( abstract_value::abstract( d->id, h, t_int( ci.width ) ) );
                ++f.inst;
                return false;
            }

            case callee_kind::a_lift:
            {
                // injection into the sum: the value stays concrete-tagged
                abstract_value v = value_of( f, in.args[ 0 ] );
                set_reg( abstract_value::concrete( v.payload, t_int( ci.width ) ) );
                ++f.inst;
                return false;
            }

            case callee_kind::a_lower:
            {
                abstract_value v = value_of( f, in.args[ 0 ] );
                if ( v.is_concrete() )
                {
                    set_reg( abstract_value::concrete( v.payload, t_int( ci.width ) ) );
                    ++f.inst;
                    return false;
                }
                auto *d = registry ? registry->by_id( v.domain ) : nullptr;
                if ( !d )
                    return trap( trap_kind::bad_call, "value from unregistered domain" );
                auto ctx = make_ctx( st );
                std::string err;
                auto bitsv = d->lower( v.payload, t_int( ci.width ), ctx, err );
                if ( !bitsv )
                    return trap( trap_kind::lower_failed, "lower failed: " + err );
                set_reg( abstract_value::concrete( *bitsv, t_int( ci.width ) ) );
                ++f.inst;
                return false;
            }

            case callee_kind::a_freeze:
            {
                abstract_value p = value_of( f, in.args[ 0 ] );
                abstract_value v = value_of( f, in.args[ 1 ] );
                uint32_t size = t_int( ci.width ).byte_size();
                if ( !mem_range_ok( st, p.payload, size ) )
                    return trap( trap_kind::out_of_bounds );
                uint32_t seg = ptr_seg( p.payload ), off = ptr_off( p.payload );
                evict_overlaps( st, seg, off, size );
                if ( v.is_concrete() )
                    write_bytes( st, p.payload, size, v.payload );
                else
                {
                    auto *d = registry ? registry->by_id( v.domain ) : nullptr;
                    if ( !d )
                        return trap( trap_kind::bad_call, "value from unregistered domain" );
                    auto ctx = make_ctx( st );
                    write_bytes( st, p.payload, size, 0 ); // placeholder bytes
                    st.shadow[ { seg, off } ] =
                        shadow_entry{ size, d->id, t_int( ci.width ), d->freeze( v.payload, ctx ) };
                }
                ++f.inst;
                return false;
            }

            case callee_kind::a_thaw:
            {
                abstract_value p = value_of( f, in.args[ 0 ] );
                uint32_t size = t_int( ci.width ).byte_size();
                if ( !mem_range_ok( st, p.payload, size ) )
                    return trap( trap_kind::out_of_bounds );
                uint32_t seg = ptr_seg( p.payload ), off = ptr_off( p.payload );

                int overlaps = 0;
                bool exact = false;
                shadow_entry entry;
                for_overlaps( st, seg, off, size, [ & ]( auto it )
                {
                    ++overlaps;
                    if ( it->first.second == off && it->second.size == size )
                    {
                        exact = true;
                        entry = it->second;
                    }
                } );
                if ( overlaps == 0 )
                {
                    uint64_t v = bits::trunc( read_bytes( st, p.payload, size ), ci.width );
                    set_reg( abstract_value::concrete( v, t_int( ci.width ) ) );
                    ++f.inst;
                    return false;
                }
                if ( !exact || overlaps > 1 )
                    return trap( trap_kind::shadow_partial_access );
                if ( !( entry.stype == t_int( ci.width ) ) )
                    return trap( trap_kind::shadow_type_mismatch,
                                 "frozen value has a different type" );
                auto *d = registry ? registry->by_id( entry.domain ) : nullptr;
                if ( !d )
                    return trap( trap_kind::bad_call, "frozen value from unregistered domain" );
                auto ctx = make_ctx( st );
                handle_t h = d->thaw( entry.frozen, entry.stype, ctx );
                set_reg( abstract_value::abstract( d->id, h, entry.stype ) );
                ++f.inst;
                return false;
            }

            case callee_kind::a_op:
            case callee_kind::a_icmp:
            {
                auto *d = domain_of( ci.domain );
                if ( !d )
                    return trap( trap_kind::bad_call, "domain not registered: " + ci.domain );
                abstract_value a = value_of( f, in.args[ 0 ] );
                abstract_value b = value_of( f, in.args[ 1 ] );
                auto ctx = make_ctx( st );
                lifter *l = nullptr;
                try
                {
                    l = &lifter_for( ci, *d );
                }
                catch ( const unsupported_op &u )
                {
                    return trap( trap_kind::bad_call, u.what() );
                }
                auto r = l->dispatch_binary( a, b, ctx );
                if ( r.trap_div_zero )
                    return trap( trap_kind::div_by_zero );
                set_reg( r.value );
                ++f.inst;
                if ( ctx.pending_div_guard != no_term )
                {
                    out = ev( vm_event::kind::abstract_div );
                    out.cond = abstract_value::abstract( d->id, ctx.pending_div_guard,
                                                         t_int( ci.width ) );
                    return true;
                }
                if ( ctx.pending_div_unknown )
                {
                    out = ev( vm_event::kind::div_unknown );
                    return true;
                }
                return false;
            }

            case callee_kind::a_cast:
            {
                auto *d = domain_of( ci.domain );
                if ( !d )
                    return trap( trap_kind::bad_call, "domain not registered: " + ci.domain );
                abstract_value a = value_of( f, in.args[ 0 ] );
                auto ctx = make_ctx( st );
                lifter *l = nullptr;
                try
                {
                    l = &lifter_for( ci, *d );
                }
                catch ( const unsupported_op &u )
                {
                    return trap( trap_kind::bad_call, u.what() );
                }
                set_reg( l->dispatch_cast( a, ctx ).value );
                ++f.inst;
                return false;
            }

            case callee_kind::a_assume:
            {
                abstract_value c = value_of( f, in.args[ 0 ] );
                abstract_value dirv = value_of( f, in.args[ 1 ] );
                uint32_t dir = uint32_t( dirv.payload & 1 );
                ++f.inst;
                if ( c.is_concrete() )
                {
                    if ( ( c.payload & 1 ) == dir )
                        return false;
                    st.halted = true;
                    out = ev( vm_event::kind::assume_blocked );
                    return true;
                }
                auto *d = registry ? registry->by_id( c.domain ) : nullptr;
                if ( !d )
                    return trap( trap_kind::bad_call, "value from unregistered domain" );
                auto ctx = make_ctx( st );
                if ( d->assume( c.payload, int( dir ), ctx ) == assume_effect::infeasible )
                {
                    st.halted = true;
                    out = ev( vm_event::kind::assume_infeasible );
                    return true;
                }
                out = ev( vm_event::kind::assume_recorded );
                return true;
            }

            case callee_kind::a_assert:
            {
                abstract_value c = value_of( f, in.args[ 0 ] );
                if ( c.is_concrete() )
                {
                    if ( !( c.payload & 1 ) )
                        return trap( trap_kind::assert_failed );
                    ++f.inst;
                    return false;
                }
                auto *d = registry ? registry->by_id( c.domain ) : nullptr;
                if ( !d )
                    return trap( trap_kind::bad_call, "value from unregistered domain" );
                auto ctx = make_ctx( st );
                switch ( d->decide_i1( c.payload, ctx ) )
                {
                    case decided::is_true:
                        ++f.inst;
                        return false;
                    case decided::is_false:
                        return trap( trap_kind::assert_failed );
                    case decided::undetermined:
                        ++f.inst;
                        out = ev( vm_event::kind::abstract_assert );
                        out.cond = c;
                        return true;
                }
                return false;
            }
        }
        return trap( trap_kind::internal, "unhandled call kind" );
    }
};

} // namespace symtrans
