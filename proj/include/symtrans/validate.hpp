#pragma once

#include <algorithm>
#include <charconv>
#include <optional>

#include "diag.hpp"
#include "ir.hpp"

namespace symtrans
{

inline std::vector< std::vector< uint32_t > > cfg_preds( const function &fn )
{
    std::vector< std::vector< uint32_t > > preds( fn.blocks.size() );
    for ( uint32_t b = 0; b < fn.blocks.size(); ++b )
    {
        if ( fn.blocks[ b ].insts.empty() )
            continue;
        const instruction &t = fn.blocks[ b ].terminator();
        if ( t.op != opcode::br )
            continue;
        preds[ t.target ].push_back( b );
        if ( t.is_cond_br() && t.target_false != t.target )
            preds[ t.target_false ].push_back( b );
    }
    return preds;
}

// iterative dominator sets over the CFG; unreachable blocks keep the full set
inline std::vector< std::vector< bool > > compute_dominators( const function &fn )
{
    size_t n = fn.blocks.size();
    auto preds = cfg_preds( fn );
    std::vector< std::vector< bool > > dom( n, std::vector< bool >( n, true ) );
    if ( !n )
        return dom;
    dom[ 0 ].assign( n, false );
    dom[ 0 ][ 0 ] = true;

    bool changed = true;
    while ( changed )
    {
        changed = false;
        for ( uint32_t b = 1; b < n; ++b )
        {
            std::vector< bool > next( n, true );
            bool any_pred = false;
            for ( uint32_t p : preds[ b ] )
            {
                any_pred = true;
                for ( size_t i = 0; i < n; ++i )
                    next[ i ] = next[ i ] && dom[ p ][ i ];
            }
            if ( !any_pred )
                continue; // unreachable: stays "dominated by all"
            next[ b ] = true;
            if ( next != dom[ b ] )
            {
                dom[ b ] = std::move( next );
                changed = true;
            }
        }
    }
    return dom;
}

namespace detail
{

struct sig
{
    std::vector< vtype > args;
    bool returns_void = false;
    vtype ret;
};

inline std::optional< int > parse_width_tok( std::string_view t )
{
    if ( t.size() < 2 || t[ 0 ] != 'i' )
        return std::nullopt;
    int w = 0;
    auto [ p, ec ] = std::from_chars( t.data() + 1, t.data() + t.size(), w );
    if ( ec != std::errc{} || p != t.data() + t.size() || !valid_width( w ) )
        return std::nullopt;
    return w;
}

inline std::optional< opcode > binop_by_name( std::string_view n )
{
    for ( int i = 0; i <= int( opcode::ashr ); ++i )
        if ( opcode_name( opcode( i ) ) == n )
            return opcode( i );
    return std::nullopt;
}

inline std::optional< icmp_pred > pred_by_name( std::string_view n )
{
    for ( int i = 0; i <= int( icmp_pred::sge ); ++i )
        if ( pred_name( icmp_pred( i ) ) == n )
            return icmp_pred( i );
    return std::nullopt;
}

inline std::vector< std::string_view > split_dots( std::string_view s )
{
    std::vector< std::string_view > parts;
    size_t start = 0;
    for ( size_t i = 0; i <= s.size(); ++i )
        if ( i == s.size() || s[ i ] == '.' )
        {
            parts.push_back( s.substr( start, i - start ) );
            start = i + 1;
        }
    return parts;
}

// resolve a callee name into callee_info + expected signature;
// returns false when the name is not a recognized intrinsic
inline bool resolve_intrinsic( std::string_view name, callee_info &ci, sig &s )
{
    auto p = split_dots( name );
    auto head = p[ 0 ];

    auto ret_void = [ & ]() { s.returns_void = true; };

    if ( head == "sym" && p.size() == 2 )
    {
        auto w = parse_width_tok( p[ 1 ] );
        if ( !w )
            return false;
        ci = { callee_kind::sym, uint8_t( *w ), 0, opcode::add, icmp_pred::eq, "" };
        s.ret = t_int( *w );
        return true;
    }
    if ( head == "choose" && p.size() == 1 )
    {
        ci.kind = callee_kind::choose;
        s.args = { t_int( 32 ) };
        s.ret = t_int( 32 );
        return true;
    }
    if ( head == "assume" && p.size() == 1 )
    {
        ci.kind = callee_kind::assume_;
        s.args = { t_i1 };
        ret_void();
        return true;
    }
    if ( head == "assert" && p.size() == 1 )
    {
        ci.kind = callee_kind::assert_;
        s.args = { t_i1 };
        ret_void();
        return true;
    }
    if ( ( head == "lower" || head == "print" ) && p.size() == 2 )
    {
        auto w = parse_width_tok( p[ 1 ] );
        if ( !w )
            return false;
        ci.kind = head == "lower" ? callee_kind::lower : callee_kind::print;
        ci.width = uint8_t( *w );
        s.args = { t_int( *w ) };
        if ( head == "lower" )
            s.ret = t_int( *w );
        else
            ret_void();
        return true;
    }

    if ( head == "a_sym" && p.size() == 3 )
    {
        auto w = parse_width_tok( p[ 1 ] );
        if ( !w )
            return false;
        ci = { callee_kind::a_sym, uint8_t( *w ), 0, opcode::add, icmp_pred::eq, std::string( p[ 2 ] ) };
        s.ret = t_aval;
        return true;
    }
    if ( head == "a_lift" && p.size() == 2 )
    {
        auto w = parse_width_tok( p[ 1 ] );
        if ( !w )
            return false;
        ci = { callee_kind::a_lift, uint8_t( *w ), 0, opcode::add, icmp_pred::eq, "" };
        s.args = { t_int( *w ) };
        s.ret = t_aval;
        return true;
    }
    if ( head == "a_lower" && p.size() == 3 )
    {
        auto w = parse_width_tok( p[ 1 ] );
        if ( !w )
            return false;
        ci = { callee_kind::a_lower, uint8_t( *w ), 0, opcode::add, icmp_pred::eq, std::string( p[ 2 ] ) };
        s.args = { t_aval };
        s.ret = t_int( *w );
        return true;
    }
    if ( head == "a_freeze" && p.size() == 2 )
    {
        auto w = parse_width_tok( p[ 1 ] );
        if ( !w )
            return false;
        ci = { callee_kind::a_freeze, uint8_t( *w ), 0, opcode::add, icmp_pred::eq, "" };
        s.args = { t_ptr, t_aval };
        ret_void();
        return true;
    }
    if ( head == "a_thaw" && p.size() == 2 )
    {
        auto w = parse_width_tok( p[ 1 ] );
        if ( !w )
            return false;
        ci = { callee_kind::a_thaw, uint8_t( *w ), 0, opcode::add, icmp_pred::eq, "" };
        s.args = { t_ptr };
        s.ret = t_aval;
        return true;
    }
    if ( head == "a_assume" && p.size() == 2 )
    {
        ci = { callee_kind::a_assume, 0, 0, opcode::add, icmp_pred::eq, std::string( p[ 1 ] ) };
        s.args = { t_aval, t_int( 32 ) };
        ret_void();
        return true;
    }
    if ( head == "a_assert" && p.size() == 2 )
    {
        ci = { callee_kind::a_assert, 0, 0, opcode::add, icmp_pred::eq, std::string( p[ 1 ] ) };
        s.args = { t_aval };
        ret_void();
        return true;
    }
    if ( head == "a_icmp" && p.size() == 4 )
    {
        auto pr = pred_by_name( p[ 1 ] );
        auto w = parse_width_tok( p[ 2 ] );
        if ( !pr || !w )
            return false;
        ci = { callee_kind::a_icmp, uint8_t( *w ), 0, opcode::icmp, *pr, std::string( p[ 3 ] ) };
        s.args = { t_aval, t_aval };
        s.ret = t_aval;
        return true;
    }
    if ( ( head == "a_zext" || head == "a_sext" || head == "a_trunc" ) && p.size() == 4 )
    {
        auto wf = parse_width_tok( p[ 1 ] );
        auto wt = parse_width_tok( p[ 2 ] );
        if ( !wf || !wt )
            return false;
        opcode op = head == "a_zext" ? opcode::zext : head == "a_sext" ? opcode::sext : opcode::trunc;
        if ( op == opcode::trunc ? ( *wt >= *wf ) : ( *wt <= *wf ) )
            return false;
        ci = { callee_kind::a_cast, uint8_t( *wf ), uint8_t( *wt ), op, icmp_pred::eq, std::string( p[ 3 ] ) };
        s.args = { t_aval };
        s.ret = t_aval;
        return true;
    }
    if ( head.size() > 2 && head.substr( 0, 2 ) == "a_" && p.size() == 3 )
    {
        auto bop = binop_by_name( head.substr( 2 ) );
        auto w = parse_width_tok( p[ 1 ] );
        if ( !bop || !w )
            return false;
        ci = { callee_kind::a_op, uint8_t( *w ), 0, *bop, icmp_pred::eq, std::string( p[ 2 ] ) };
        s.args = { t_aval, t_aval };
        s.ret = t_aval;
        return true;
    }
    return false;
}

struct validator
{
    const ir_module &mod;
    diagnostics out;

    explicit validator( const ir_module &m ) : mod( m ) {}

    function *cur = nullptr;
    uint32_t cur_block = 0;
    uint32_t cur_line = 0;

    void err( const std::string &msg )
    {
        std::string where = "@" + cur->name;
        if ( cur_block < cur->blocks.size() )
            where += ":" + cur->blocks[ cur_block ].label;
        out.push_back( { cur_line, 0, where + ": " + msg } );
    }

    static std::string type_str( vtype t )
    {
        if ( t.is_ptr() )
            return "ptr";
        if ( t.is_aval() )
            return "aval";
        return "i" + std::to_string( t.bits );
    }

    void check_function( function &fn )
    {
        cur = &fn;

        // register table: params first, then instruction results
        size_t nregs = fn.reg_names.size();
        fn.reg_types.assign( nregs, vtype{} );
        std::vector< int > def_count( nregs, 0 );
        std::vector< std::pair< uint32_t, uint32_t > > def_site( nregs, { no_block, 0 } );

        for ( uint32_t i = 0; i < fn.params.size(); ++i )
        {
            if ( i >= nregs )
            {
                err( "parameter table inconsistent with register names" );
                return;
            }
            fn.reg_types[ i ] = fn.params[ i ].type;
            def_count[ i ] = 1;
        }

        if ( fn.blocks.empty() )
        {
            cur_block = 0;
            err( "function has no blocks" );
            return;
        }

        for ( uint32_t b = 0; b < fn.blocks.size(); ++b )
        {
            cur_block = b;
            auto &bb = fn.blocks[ b ];
            if ( bb.insts.empty() )
            {
                cur_line = 0;
                err( "missing terminator (empty block)" );
                continue;
            }
            for ( uint32_t i = 0; i < bb.insts.size(); ++i )
            {
                auto &in = bb.insts[ i ];
                cur_line = in.line;
                bool last = i + 1 == bb.insts.size();
                if ( is_terminator( in.op ) && !last )
                    err( "terminator in the middle of a block" );
                if ( !is_terminator( in.op ) && last )
                    err( "missing terminator" );
                if ( in.op == opcode::phi && i > 0 && bb.insts[ i - 1 ].op != opcode::phi )
                    err( "phi not at block head" );
                if ( in.result != no_reg )
                {
                    if ( in.result >= nregs )
                    {
                        err( "register index out of range" );
                        continue;
                    }
                    if ( def_count[ in.result ]++ )
                        err( "SSA violation: register %" + fn.reg_names[ in.result ] +
                             " defined more than once" );
                    fn.reg_types[ in.result ] = in.result_type;
                    def_site[ in.result ] = { b, i };
                }
            }
        }
        if ( !out.empty() && out.size() > 64 )
            return; // avoid cascading noise on badly broken input

        // now that def types are known, check uses and opcode signatures
        auto preds = cfg_preds( fn );
        auto dom = compute_dominators( fn );

        auto check_operand = [ & ]( const operand &o )
        {
            if ( !o.is_reg() )
                return;
            if ( o.reg >= nregs || !def_count[ o.reg ] )
            {
                err( "use of undefined register" );
                return;
            }
            if ( fn.reg_types[ o.reg ] != o.type )
                err( "operand type " + type_str( o.type ) + " disagrees with definition of %" +
                     fn.reg_names[ o.reg ] + " (" + type_str( fn.reg_types[ o.reg ] ) + ")" );
        };

        auto dominates_use = [ & ]( uint32_t reg, uint32_t ub, uint32_t ui )
        {
            if ( reg < fn.params.size() )
                return true;
            auto [ db, di ] = def_site[ reg ];
            if ( db == no_block )
                return true; // undefined: reported separately
            if ( db == ub )
                return di < ui;
            return bool( dom[ ub ][ db ] );
        };

        for ( uint32_t b = 0; b < fn.blocks.size(); ++b )
        {
            cur_block = b;
            auto &bb = fn.blocks[ b ];
            for ( uint32_t i = 0; i < bb.insts.size(); ++i )
            {
                auto &in = bb.insts[ i ];
                cur_line = in.line;

                for ( auto &o : in.args )
                    check_operand( o );
                for ( auto &pi : in.incoming )
                    check_operand( pi.value );

                // def-dominates-use (phi uses are checked at the end of the
                // incoming edge's source block)
                if ( in.op == opcode::phi )
                {
                    for ( auto &pi : in.incoming )
                        if ( pi.value.is_reg() && def_count[ pi.value.reg ] &&
                             !dominates_use( pi.value.reg, pi.block,
                                             uint32_t( fn.blocks[ pi.block ].insts.size() ) ) )
                            err( "SSA violation: phi input %" + fn.reg_names[ pi.value.reg ] +
                                 " does not dominate edge from " + fn.blocks[ pi.block ].label );
                }
                else
                {
                    for ( auto &o : in.args )
                        if ( o.is_reg() && def_count[ o.reg ] && !dominates_use( o.reg, b, i ) )
                            err( "SSA violation: use of %" + fn.reg_names[ o.reg ] +
                                 " not dominated by its definition" );
                }

                check_signature( fn, in, preds, b );
            }
        }
    }

    void check_signature( function &fn, instruction &in,
                          const std::vector< std::vector< uint32_t > > &preds, uint32_t b )
    {
        auto want = [ & ]( bool cond, const std::string &msg )
        {
            if ( !cond )
                err( msg );
        };

        if ( is_binop( in.op ) )
        {
            want( in.args.size() == 2, "binary op arity" );
            if ( in.args.size() == 2 )
            {
                want( in.args[ 0 ].type.is_int() && in.args[ 0 ].type == in.args[ 1 ].type,
                      "binary op operands must be same-width integers" );
                want( in.result_type == in.args[ 0 ].type, "binary op result type mismatch" );
            }
            return;
        }
        switch ( in.op )
        {
            case opcode::icmp:
                want( in.args.size() == 2 && in.args[ 0 ].type.is_int() &&
                          in.args[ 0 ].type == in.args[ 1 ].type,
                      "icmp operands must be same-width integers" );
                want( in.result_type == t_i1, "icmp yields i1" );
                return;
            case opcode::zext:
            case opcode::sext:
                want( in.args.size() == 1 && in.args[ 0 ].type.is_int() &&
                          in.cast_to.is_int() && in.cast_to.bits > in.args[ 0 ].type.bits,
                      "extension must widen" );
                return;
            case opcode::trunc:
                want( in.args.size() == 1 && in.args[ 0 ].type.is_int() &&
                          in.cast_to.is_int() && in.cast_to.bits < in.args[ 0 ].type.bits,
                      "trunc must narrow" );
                return;
            case opcode::alloca_:
                want( in.result_type == t_ptr, "alloca yields ptr" );
                return;
            case opcode::load:
                want( in.args.size() == 1 && in.args[ 0 ].type.is_ptr(),
                      "load takes a pointer" );
                want( in.args.empty() || in.args[ 0 ].is_reg(), "load address must be a register" );
                want( !in.result_type.is_aval(), "load cannot produce aval" );
                return;
            case opcode::store:
                want( in.args.size() == 2 && in.args[ 1 ].type.is_ptr(),
                      "store takes value, pointer" );
                want( in.args.size() != 2 || in.args[ 1 ].is_reg(), "store address must be a register" );
                want( in.args.empty() || !in.args[ 0 ].type.is_aval(), "store cannot take aval" );
                return;
            case opcode::ptradd:
                want( in.args.size() == 2 && in.args[ 0 ].type.is_ptr() &&
                          in.args[ 1 ].type.is_int( 64 ),
                      "ptradd takes ptr, i64 byte offset" );
                want( in.args.empty() || in.args[ 0 ].is_reg(), "ptradd base must be a register" );
                return;
            case opcode::br:
                if ( in.is_cond_br() )
                    want( in.args[ 0 ].type == t_i1, "branch condition must be i1" );
                return;
            case opcode::phi:
            {
                want( !preds[ b ].empty(), "phi in block without predecessors" );
                std::vector< uint32_t > got;
                for ( auto &pi : in.incoming )
                {
                    want( pi.value.type == in.result_type, "phi input type mismatch" );
                    got.push_back( pi.block );
                }
                std::vector< uint32_t > expect = preds[ b ];
                std::sort( got.begin(), got.end() );
                std::sort( expect.begin(), expect.end() );
                want( got == expect, "phi inputs must cover each predecessor exactly once" );
                return;
            }
            case opcode::ret:
                if ( fn.returns_void )
                    want( in.args.empty(), "void function returns a value" );
                else
                    want( in.args.size() == 1 && in.args[ 0 ].type == fn.ret_type,
                          "ret type disagrees with function signature" );
                return;
            case opcode::call:
                check_call( in );
                return;
            default:
                return;
        }
    }

    void check_call( instruction &in )
    {
        detail::sig s;
        callee_info ci;
        if ( resolve_intrinsic( in.callee, ci, s ) )
        {
            in.ci = ci;
            if ( in.args.size() != s.args.size() )
            {
                err( "@" + in.callee + ": wrong number of arguments" );
                return;
            }
            for ( size_t i = 0; i < s.args.size(); ++i )
                if ( in.args[ i ].type != s.args[ i ] )
                    err( "@" + in.callee + ": argument " + std::to_string( i + 1 ) +
                         " must be " + type_str( s.args[ i ] ) );
            if ( s.returns_void )
            {
                if ( in.result != no_reg )
                    err( "@" + in.callee + " returns no value" );
            }
            else if ( in.result == no_reg || in.result_type != s.ret )
                err( "@" + in.callee + " must be called as " + type_str( s.ret ) );
            return;
        }

        const function *callee = mod.find( in.callee );
        if ( !callee )
        {
            err( "call to unknown function @" + in.callee );
            return;
        }
        in.ci = callee_info{};
        if ( in.args.size() != callee->params.size() )
        {
            err( "@" + in.callee + ": wrong number of arguments" );
            return;
        }
        for ( size_t i = 0; i < in.args.size(); ++i )
            if ( in.args[ i ].type != callee->params[ i ].type )
                err( "@" + in.callee + ": argument " + std::to_string( i + 1 ) + " must be " +
                     type_str( callee->params[ i ].type ) );
        if ( callee->returns_void )
        {
            if ( in.result != no_reg )
                err( "@" + in.callee + " returns void" );
        }
        else if ( in.result == no_reg || in.result_type != callee->ret_type )
            err( "call result type disagrees with @" + in.callee );
    }
};

} // namespace detail

// checks all structural invariants and resolves call targets in place;
// an empty result means the module is valid
inline diagnostics validate( ir_module &m )
{
    detail::validator v( m );
    for ( auto &fn : m.functions )
        v.check_function( fn );
    if ( auto *main_fn = m.find( "main" ) )
    {
        if ( !main_fn->params.empty() || main_fn->returns_void ||
             !( main_fn->ret_type == t_int( 32 ) ) )
            v.out.push_back( { 0, 0, "@main must have signature () -> i32" } );
    }
    return v.out;
}

} // namespace symtrans
