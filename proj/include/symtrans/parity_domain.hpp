#pragma once

#include "domain.hpp"

namespace symtrans
{

/*
 * Minimal non-relational demonstration domain: a value is even, odd or in a
 * superposition of those (undef). Handles index mutable per-state cells so
 * an assume can refine a value everywhere it is referenced. Transfer
 * functions cover add, sub, mul and the and-with-constant-1 mask pattern;
 * everything else goes to undef, which is absorbing.
 */
struct parity_domain final : domain_descriptor
{
    enum : uint64_t { even = 0, odd = 1, undef = 2 };

    // per-cell derivation metadata, used to recognize the refinement pattern
    enum class deriv : uint64_t { none = 0, lifted_const = 1, mask_of = 2, cmp_mask_eq = 3 };

    parity_domain() { domain_name = "parity"; }

    bool supports( opcode, icmp_pred, int ) const override { return true; }

    static handle_t cell( exec_ctx &ctx, uint64_t parity, deriv d = deriv::none,
                          uint64_t m1 = 0, uint64_t m2 = 0 )
    {
        ctx.dstate.cells.push_back( parity );
        ctx.dstate.meta.push_back( { uint64_t( d ), m1, m2 } );
        return ctx.dstate.cells.size() - 1;
    }

    static uint64_t parity_of( const exec_ctx &ctx, handle_t h ) { return ctx.dstate.cells[ h ]; }
    static deriv deriv_of( const exec_ctx &ctx, handle_t h )
    {
        return deriv( ctx.dstate.meta[ h ][ 0 ] );
    }

    static std::optional< uint64_t > const_value( const exec_ctx &ctx, handle_t h )
    {
        if ( deriv_of( ctx, h ) == deriv::lifted_const )
            return ctx.dstate.meta[ h ][ 1 ];
        return std::nullopt;
    }

    handle_t op_binary( opcode op, int width, handle_t a, handle_t b, exec_ctx &ctx ) override
    {
        uint64_t pa = parity_of( ctx, a ), pb = parity_of( ctx, b );
        auto ca = const_value( ctx, a ), cb = const_value( ctx, b );

        if ( ca && cb ) // lifted constants fold exactly
            if ( auto v = fold_binary( term_op_of( op ), *ca, *cb, width ) )
                return cell( ctx, *v & 1, deriv::lifted_const, *v );

        if ( op == opcode::band )
        {
            if ( cb && *cb == 1 )
                return cell( ctx, pa, deriv::mask_of, a );
            if ( ca && *ca == 1 )
                return cell( ctx, pb, deriv::mask_of, b );
            return cell( ctx, undef );
        }

        if ( is_div_like( op ) )
            ctx.pending_div_unknown = true; // divisor value is unknowable here

        if ( pa == undef || pb == undef )
            return cell( ctx, undef );

        switch ( op )
        {
            case opcode::add:
            case opcode::sub:
                return cell( ctx, ( pa + pb ) & 1 );
            case opcode::mul:
                return cell( ctx, pa & pb );
            default:
                return cell( ctx, undef );
        }
    }

    handle_t op_icmp( icmp_pred p, int width, handle_t a, handle_t b, exec_ctx &ctx ) override
    {
        auto ca = const_value( ctx, a ), cb = const_value( ctx, b );
        if ( ca && cb )
            if ( auto v = fold_binary( term_op_of( p ), *ca, *cb, width ) )
                return cell( ctx, *v & 1, deriv::lifted_const, *v );

        if ( p == icmp_pred::eq )
        {
            // (x & 1) == constant: the one recognized refinement pattern
            auto mask_side = [ & ]( handle_t m, handle_t k ) -> std::optional< handle_t >
            {
                if ( deriv_of( ctx, m ) != deriv::mask_of )
                    return std::nullopt;
                auto cv = const_value( ctx, k );
                if ( !cv )
                    return std::nullopt;
                uint64_t x = ctx.dstate.meta[ m ][ 1 ];
                if ( *cv > 1 ) // (x & 1) can never equal it
                    return cell( ctx, even, deriv::lifted_const, 0 );
                uint64_t pm = parity_of( ctx, m );
                if ( pm != undef )
                    return cell( ctx, pm == ( *cv & 1 ) ? odd : even );
                return cell( ctx, undef, deriv::cmp_mask_eq, x, *cv & 1 );
            };
            if ( auto r = mask_side( a, b ) )
                return *r;
            if ( auto r = mask_side( b, a ) )
                return *r;
        }
        return cell( ctx, undef );
    }

    handle_t op_cast( opcode, int, int, handle_t, exec_ctx &ctx ) override
    {
        return cell( ctx, undef );
    }

    handle_t lift( uint64_t value, vtype, exec_ctx &ctx ) override
    {
        return cell( ctx, value & 1, deriv::lifted_const, value );
    }

    std::optional< uint64_t > lower( handle_t h, vtype t, exec_ctx &ctx,
                                     std::string &error ) override
    {
        if ( auto cv = const_value( ctx, h ) )
            return *cv;
        uint64_t p = parity_of( ctx, h );
        if ( t.is_int( 1 ) && p != undef )
            return p; // i1: even = {0}, odd = {1} are singletons
        error = "parity value is not a singleton";
        return std::nullopt;
    }

    handle_t fresh_input( int, exec_ctx &ctx ) override { return cell( ctx, undef ); }

    assume_effect assume( handle_t cond, int direction, exec_ctx &ctx ) override
    {
        uint64_t pc = parity_of( ctx, cond );
        if ( pc != undef ) // i1 parity is the value itself
            return ( pc == 1 ) == ( direction == 1 ) ? assume_effect::ok
                                                     : assume_effect::infeasible;

        if ( deriv_of( ctx, cond ) == deriv::cmp_mask_eq )
        {
            uint64_t x = ctx.dstate.meta[ cond ][ 1 ];
            uint64_t bit = ctx.dstate.meta[ cond ][ 2 ];
            uint64_t target = direction ? bit : 1 - bit;
            uint64_t cur = ctx.dstate.cells[ x ];
            if ( cur == undef )
            {
                ctx.dstate.cells[ x ] = target;
                return assume_effect::ok;
            }
            return cur == target ? assume_effect::ok : assume_effect::infeasible;
        }
        return assume_effect::ok; // unrecognized condition: fork unconstrained
    }

    decided decide_i1( handle_t cond, const exec_ctx &ctx ) const override
    {
        uint64_t p = parity_of( ctx, cond );
        if ( p == even )
            return decided::is_false;
        if ( p == odd )
            return decided::is_true;
        return decided::undetermined;
    }

    uint64_t freeze( handle_t h, exec_ctx &ctx ) override { return parity_of( ctx, h ); }

    handle_t thaw( uint64_t frozen, vtype, exec_ctx &ctx ) override
    {
        return cell( ctx, frozen );
    }

    std::string describe( handle_t h, const exec_ctx &ctx ) const override
    {
        uint64_t p = parity_of( ctx, h );
        return p == even ? "even" : p == odd ? "odd" : "undef";
    }
};

} // namespace symtrans
