#pragma once

#include "domain.hpp"

namespace symtrans
{

inline std::string format_term( const term_arena &ar, term_id id )
{
    const term_node &n = ar[ id ];
    switch ( n.op )
    {
        case term_op::constant:
            return std::to_string( n.payload ) + ":i" + std::to_string( n.width );
        case term_op::symbol:
            return "s" + std::to_string( n.payload );
        default:
            break;
    }
    const char *names[] = { "const", "sym", "add", "sub", "mul", "udiv", "sdiv", "urem",
                            "srem", "and", "or", "xor", "shl", "lshr", "ashr",
                            "eq", "ne", "ult", "ule", "ugt", "uge", "slt", "sle",
                            "sgt", "sge", "zext", "sext", "trunc" };
    std::string s = "(";
    s += names[ int( n.op ) ];
    s += " " + format_term( ar, n.lhs );
    if ( n.rhs != no_term )
        s += " " + format_term( ar, n.rhs );
    return s + ")";
}

/*
 * The relational term domain: values are nodes of the free bitvector term
 * algebra, instructions build terms from their operands, assume records
 * branch constraints onto the path condition. Handles are term ids.
 */
struct term_domain final : domain_descriptor
{
    term_domain() { domain_name = "term"; }

    bool supports( opcode, icmp_pred, int ) const override { return true; }
    bool handles_are_terms() const override { return true; }

    handle_t op_binary( opcode op, int, handle_t a, handle_t b, exec_ctx &ctx ) override
    {
        term_id r = ctx.arena.apply( term_op_of( op ), term_id( a ), term_id( b ) );
        if ( is_div_like( op ) && !ctx.arena[ term_id( b ) ].is_const() )
        {
            // the implicit divisor != 0 conjunct rides along in every query
            term_id guard = ctx.arena.apply( term_op::ne, term_id( b ),
                                             ctx.arena.constant( 0, ctx.arena[ term_id( b ) ].width ) );
            ctx.pc.guards.push_back( guard );
            ctx.pending_div_guard = term_id( b );
        }
        return r;
    }

    handle_t op_icmp( icmp_pred p, int, handle_t a, handle_t b, exec_ctx &ctx ) override
    {
        return ctx.arena.apply( term_op_of( p ), term_id( a ), term_id( b ) );
    }

    handle_t op_cast( opcode op, int, int to_w, handle_t a, exec_ctx &ctx ) override
    {
        return apply_cast( ctx.arena, term_op_of( op ), term_id( a ), to_w );
    }

    handle_t lift( uint64_t value, vtype t, exec_ctx &ctx ) override
    {
        return ctx.arena.constant( value, t.is_int() ? t.bits : 64 );
    }

    // model-based lowering with pinning: ask the solver for a model of the
    // current path condition, evaluate the term under it, and pin the term
    // to the returned value so later execution stays consistent
    std::optional< uint64_t > lower( handle_t h, vtype t, exec_ctx &ctx,
                                     std::string &error ) override
    {
        term_id id = term_id( h );
        if ( ctx.arena[ id ].is_const() )
            return ctx.arena[ id ].payload;
        if ( !ctx.solver )
        {
            error = "lower requires a solver";
            return std::nullopt;
        }
        solver_query q;
        q.symbol_widths = ctx.symbols.widths;
        q.asserts = ctx.pc.all();
        q.want_model = true;
        solver_answer a = ctx.solver->check( ctx.arena, q );
        if ( a.is_unsat() )
        {
            error = "lower on an infeasible path";
            return std::nullopt;
        }
        if ( a.is_unknown() )
        {
            error = "solver failed during lower: " + a.reason;
            return std::nullopt;
        }
        auto v = eval_term( ctx.arena, id, a.model );
        if ( !v )
        {
            error = "lower evaluated a trapping term";
            return std::nullopt;
        }
        int w = t.is_int() ? t.bits : 64;
        term_id pin = ctx.arena.apply( term_op::eq, id, ctx.arena.constant( *v, w ) );
        if ( !( ctx.arena[ pin ].is_const() && ctx.arena[ pin ].payload == 1 ) )
            ctx.pc.entries.push_back( pin );
        return *v;
    }

    handle_t fresh_input( int width, exec_ctx &ctx ) override
    {
        uint32_t idx = ctx.symbols.fresh( width );
        return ctx.arena.symbol( idx, width );
    }

    assume_effect assume( handle_t cond, int direction, exec_ctx &ctx ) override
    {
        pc_assume( ctx.arena, ctx.pc, term_id( cond ), direction );
        return assume_effect::ok;
    }

    decided decide_i1( handle_t cond, const exec_ctx &ctx ) const override
    {
        const term_node &n = ctx.arena[ term_id( cond ) ];
        if ( n.is_const() )
            return n.payload ? decided::is_true : decided::is_false;
        return decided::undetermined;
    }

    std::string describe( handle_t h, const exec_ctx &ctx ) const override
    {
        return format_term( ctx.arena, term_id( h ) );
    }
};

} // namespace symtrans
