#pragma once

#include <symtrans/term.hpp>

namespace oracle
{

/*
 * Independent tree-walking term evaluator, written from the SMT-LIB
 * bitvector definitions (division traps like the VM instead of taking the
 * total SMT value; every query in this system guards divisors anyway).
 * Kept deliberately separate from bitops.hpp: recursion instead of
 * iteration, unsigned algorithms instead of signed casts.
 */

struct trapped
{
};

inline uint64_t msk( int w ) { return w >= 64 ? ~0ull : ( 1ull << w ) - 1; }

inline bool neg_bit( uint64_t v, int w ) { return ( v >> ( w - 1 ) ) & 1; }

inline uint64_t bvneg( uint64_t v, int w ) { return ( ~v + 1 ) & msk( w ); }

// unsigned magnitude comparison of signed interpretations
inline bool s_less( uint64_t a, uint64_t b, int w )
{
    bool na = neg_bit( a, w ), nb = neg_bit( b, w );
    if ( na != nb )
        return na;
    return ( a & msk( w ) ) < ( b & msk( w ) );
}

inline uint64_t eval( const symtrans::term_arena &ar, symtrans::term_id id,
                      std::span< const uint64_t > asg )
{
    using symtrans::term_op;
    const symtrans::term_node &n = ar[ id ];
    int w = n.width;

    if ( n.op == term_op::constant )
        return n.payload & msk( w );
    if ( n.op == term_op::symbol )
        return ( n.payload < asg.size() ? asg[ n.payload ] : 0 ) & msk( w );

    uint64_t a = eval( ar, n.lhs, asg );
    uint64_t b = n.rhs == symtrans::no_term ? 0 : eval( ar, n.rhs, asg );
    int cw = ar[ n.lhs ].width; // operand width for comparisons/casts

    switch ( n.op )
    {
        case term_op::add: return ( a + b ) & msk( w );
        case term_op::sub: return ( a + bvneg( b, w ) ) & msk( w );
        case term_op::mul: return ( a * b ) & msk( w );
        case term_op::udiv:
            if ( !b )
                throw trapped{};
            return ( a / b ) & msk( w );
        case term_op::urem:
            if ( !b )
                throw trapped{};
            return ( a % b ) & msk( w );
        case term_op::sdiv:
        {
            if ( !b )
                throw trapped{};
            // SMT-LIB bvsdiv: sign cases over bvudiv of magnitudes
            bool na = neg_bit( a, w ), nb = neg_bit( b, w );
            uint64_t ua = na ? bvneg( a, w ) : a;
            uint64_t ub = nb ? bvneg( b, w ) : b;
            uint64_t q = ua / ub;
            return ( na != nb ? bvneg( q, w ) : q ) & msk( w );
        }
        case term_op::srem:
        {
            if ( !b )
                throw trapped{};
            bool na = neg_bit( a, w ), nb = neg_bit( b, w );
            uint64_t ua = na ? bvneg( a, w ) : a;
            uint64_t ub = nb ? bvneg( b, w ) : b;
            uint64_t r = ua % ub;
            return ( na ? bvneg( r, w ) : r ) & msk( w );
        }
        case term_op::band: return a & b;
        case term_op::bor: return a | b;
        case term_op::bxor: return a ^ b;
        case term_op::shl: return b >= uint64_t( w ) ? 0 : ( a << b ) & msk( w );
        case term_op::lshr: return b >= uint64_t( w ) ? 0 : a >> b;
        case term_op::ashr:
        {
            bool na = neg_bit( a, cw );
            if ( b >= uint64_t( cw ) )
                return na ? msk( cw ) : 0;
            uint64_t filled = na ? ~( msk( cw ) >> b ) & msk( cw ) : 0;
            return ( ( a >> b ) | filled ) & msk( cw );
        }
        case term_op::eq: return a == b;
        case term_op::ne: return a != b;
        case term_op::ult: return a < b;
        case term_op::ule: return a <= b;
        case term_op::ugt: return a > b;
        case term_op::uge: return a >= b;
        case term_op::slt: return s_less( a, b, cw );
        case term_op::sle: return !s_less( b, a, cw );
        case term_op::sgt: return s_less( b, a, cw );
        case term_op::sge: return !s_less( a, b, cw );
        case term_op::zext: return a & msk( cw );
        case term_op::sext:
        {
            uint64_t ext = neg_bit( a, cw ) ? ( msk( w ) & ~msk( cw ) ) : 0;
            return ( a | ext ) & msk( w );
        }
        case term_op::trunc: return a & msk( w );
        default: return 0;
    }
}

// nullopt = trap
inline std::optional< uint64_t > eval_opt( const symtrans::term_arena &ar, symtrans::term_id id,
                                           std::span< const uint64_t > asg )
{
    try
    {
        return eval( ar, id, asg );
    }
    catch ( const trapped & )
    {
        return std::nullopt;
    }
}

} // namespace oracle
