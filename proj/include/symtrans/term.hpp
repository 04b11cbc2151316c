#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "bitops.hpp"
#include "ir.hpp"

namespace symtrans
{

/*
 * The free algebra of bitvector terms: hash-consed DAG nodes over nullary
 * input symbols and constants. Nodes are immutable and content-addressed,
 * so the arena only ever grows and may be shared by every execution path
 * of one worker.
 */

using term_id = uint32_t;
constexpr term_id no_term = ~0u;

enum class term_op : uint8_t
{
    constant, symbol,
    add, sub, mul, udiv, sdiv, urem, srem,
    band, bor, bxor, shl, lshr, ashr,
    eq, ne, ult, ule, ugt, uge, slt, sle, sgt, sge,
    zext, sext, trunc,
};

inline bool term_is_cmp( term_op op )
{
    return op >= term_op::eq && op <= term_op::sge;
}
inline bool term_is_binary( term_op op )
{
    return op >= term_op::add && op <= term_op::sge;
}
inline bool term_is_cast( term_op op )
{
    return op >= term_op::zext;
}
inline bool term_is_commutative( term_op op )
{
    switch ( op )
    {
        case term_op::add: case term_op::mul: case term_op::band:
        case term_op::bor: case term_op::bxor: case term_op::eq: case term_op::ne:
            return true;
        default:
            return false;
    }
}

inline term_op term_op_of( opcode op )
{
    switch ( op )
    {
        case opcode::add: return term_op::add;   case opcode::sub: return term_op::sub;
        case opcode::mul: return term_op::mul;   case opcode::udiv: return term_op::udiv;
        case opcode::sdiv: return term_op::sdiv; case opcode::urem: return term_op::urem;
        case opcode::srem: return term_op::srem; case opcode::band: return term_op::band;
        case opcode::bor: return term_op::bor;   case opcode::bxor: return term_op::bxor;
        case opcode::shl: return term_op::shl;   case opcode::lshr: return term_op::lshr;
        case opcode::ashr: return term_op::ashr; case opcode::zext: return term_op::zext;
        case opcode::sext: return term_op::sext; case opcode::trunc: return term_op::trunc;
        default: break;
    }
    return term_op::add;
}

inline term_op term_op_of( icmp_pred p )
{
    return term_op( int( term_op::eq ) + int( p ) );
}

struct term_node
{
    term_op op = term_op::constant;
    uint8_t width = 0;     // result width in bits
    term_id lhs = no_term; // unary child / binary left
    term_id rhs = no_term;
    uint64_t payload = 0;  // constant bits / symbol index

    bool is_const() const { return op == term_op::constant; }
    bool is_symbol() const { return op == term_op::symbol; }

    friend bool operator==( const term_node &, const term_node & ) = default;
};

struct term_arena
{
    std::vector< term_node > nodes;

    struct node_hash
    {
        size_t operator()( const term_node &n ) const
        {
            uint64_t h = 0xcbf29ce484222325ull;
            auto mix = [ & ]( uint64_t v )
            {
                h ^= v;
                h *= 0x100000001b3ull;
            };
            mix( uint64_t( n.op ) << 8 | n.width );
            mix( n.lhs );
            mix( n.rhs );
            mix( n.payload );
            return size_t( h );
        }
    };
    std::unordered_map< term_node, term_id, node_hash > intern;

    const term_node &operator[]( term_id id ) const { return nodes[ id ]; }
    size_t size() const { return nodes.size(); }

    term_id put( const term_node &n )
    {
        auto it = intern.find( n );
        if ( it != intern.end() )
            return it->second;
        term_id id = term_id( nodes.size() );
        nodes.push_back( n );
        intern.emplace( n, id );
        return id;
    }

    term_id constant( uint64_t value, int width )
    {
        return put( { term_op::constant, uint8_t( width ), no_term, no_term,
                      bits::trunc( value, width ) } );
    }

    term_id symbol( uint32_t index, int width )
    {
        return put( { term_op::symbol, uint8_t( width ), no_term, no_term, index } );
    }

    term_id apply( term_op op, term_id a, term_id b = no_term );

    term_id negate( term_id t ) // i1 complement
    {
        return apply( term_op::bxor, t, constant( 1, 1 ) );
    }
};

// two-constant transfer of a binary operation; nullopt when it must not fold
// (division by zero traps at evaluation time instead)
inline std::optional< uint64_t > fold_binary( term_op op, uint64_t a, uint64_t b, int w )
{
    switch ( op )
    {
        case term_op::add: return bits::add( a, b, w );
        case term_op::sub: return bits::sub( a, b, w );
        case term_op::mul: return bits::mul( a, b, w );
        case term_op::udiv: return bits::udiv( a, b, w );
        case term_op::sdiv: return bits::sdiv( a, b, w );
        case term_op::urem: return bits::urem( a, b, w );
        case term_op::srem: return bits::srem( a, b, w );
        case term_op::band: return bits::and_( a, b, w );
        case term_op::bor:  return bits::or_( a, b, w );
        case term_op::bxor: return bits::xor_( a, b, w );
        case term_op::shl:  return bits::shl( a, b, w );
        case term_op::lshr: return bits::lshr( a, b, w );
        case term_op::ashr: return bits::ashr( a, b, w );
        case term_op::eq:  return bits::cmp_eq( a, b, w );
        case term_op::ne:  return bits::cmp_ne( a, b, w );
        case term_op::ult: return bits::cmp_ult( a, b, w );
        case term_op::ule: return bits::cmp_ule( a, b, w );
        case term_op::ugt: return bits::cmp_ugt( a, b, w );
        case term_op::uge: return bits::cmp_uge( a, b, w );
        case term_op::slt: return bits::cmp_slt( a, b, w );
        case term_op::sle: return bits::cmp_sle( a, b, w );
        case term_op::sgt: return bits::cmp_sgt( a, b, w );
        case term_op::sge: return bits::cmp_sge( a, b, w );
        default: return std::nullopt;
    }
}

// evaluation under a symbol assignment; nullopt = division-by-zero trap;
// semantics match the concrete ALU bit for bit
inline std::optional< uint64_t >
eval_term( const term_arena &ar, term_id root, std::span< const uint64_t > assignment )
{
    // children always precede parents, so one forward pass suffices
    std::unordered_map< term_id, uint64_t > val;
    std::vector< term_id > order;
    std::vector< term_id > stack{ root };
    std::unordered_map< term_id, bool > seen;
    while ( !stack.empty() )
    {
        term_id id = stack.back();
        stack.pop_back();
        if ( seen[ id ] )
            continue;
        seen[ id ] = true;
        order.push_back( id );
        const term_node &n = ar[ id ];
        if ( n.lhs != no_term )
            stack.push_back( n.lhs );
        if ( n.rhs != no_term )
            stack.push_back( n.rhs );
    }
    std::sort( order.begin(), order.end() );

    for ( term_id id : order )
    {
        const term_node &n = ar[ id ];
        int w = n.width;
        auto L = [ & ] { return val[ n.lhs ]; };
        auto R = [ & ] { return val[ n.rhs ]; };
        uint64_t r = 0;
        switch ( n.op )
        {
            case term_op::constant: r = n.payload; break;
            case term_op::symbol:
                r = n.payload < assignment.size()
                        ? bits::trunc( assignment[ n.payload ], w )
                        : 0;
                break;
            case term_op::add: r = bits::add( L(), R(), w ); break;
            case term_op::sub: r = bits::sub( L(), R(), w ); break;
            case term_op::mul: r = bits::mul( L(), R(), w ); break;
            case term_op::udiv:
            case term_op::sdiv:
            case term_op::urem:
            case term_op::srem:
            {
                auto d = n.op == term_op::udiv  ? bits::udiv( L(), R(), w )
                         : n.op == term_op::sdiv ? bits::sdiv( L(), R(), w )
                         : n.op == term_op::urem ? bits::urem( L(), R(), w )
                                                 : bits::srem( L(), R(), w );
                if ( !d )
                    return std::nullopt;
                r = *d;
                break;
            }
            case term_op::band: r = bits::and_( L(), R(), w ); break;
            case term_op::bor:  r = bits::or_( L(), R(), w ); break;
            case term_op::bxor: r = bits::xor_( L(), R(), w ); break;
            case term_op::shl:  r = bits::shl( L(), R(), w ); break;
            case term_op::lshr: r = bits::lshr( L(), R(), w ); break;
            case term_op::ashr: r = bits::ashr( L(), R(), w ); break;
            case term_op::eq:  r = bits::cmp_eq( L(), R(), ar[ n.lhs ].width ); break;
            case term_op::ne:  r = bits::cmp_ne( L(), R(), ar[ n.lhs ].width ); break;
            case term_op::ult: r = bits::cmp_ult( L(), R(), ar[ n.lhs ].width ); break;
            case term_op::ule: r = bits::cmp_ule( L(), R(), ar[ n.lhs ].width ); break;
            case term_op::ugt: r = bits::cmp_ugt( L(), R(), ar[ n.lhs ].width ); break;
            case term_op::uge: r = bits::cmp_uge( L(), R(), ar[ n.lhs ].width ); break;
            case term_op::slt: r = bits::cmp_slt( L(), R(), ar[ n.lhs ].width ); break;
            case term_op::sle: r = bits::cmp_sle( L(), R(), ar[ n.lhs ].width ); break;
            case term_op::sgt: r = bits::cmp_sgt( L(), R(), ar[ n.lhs ].width ); break;
            case term_op::sge: r = bits::cmp_sge( L(), R(), ar[ n.lhs ].width ); break;
            case term_op::zext:  r = bits::zext( L(), ar[ n.lhs ].width, w ); break;
            case term_op::sext:  r = bits::sext( L(), ar[ n.lhs ].width, w ); break;
            case term_op::trunc: r = bits::trunc( L(), w ); break;
        }
        val[ id ] = r;
    }
    return val[ root ];
}

// light canonicalization: constant folding, commutative operand ordering by
// node id, and x op 0 / x op 1 identities for add, or, xor, mul, shl --
// anything stronger is the solver's job
inline term_id term_arena::apply( term_op op, term_id a, term_id b )
{
    const term_node &na = nodes[ a ];
    int rw = na.width;
    if ( term_is_cmp( op ) )
        rw = 1;

    if ( term_is_cast( op ) )
    {
        // width carried by caller through a wrapper; see apply_cast
        return put( { op, uint8_t( rw ), a, no_term, 0 } );
    }

    const term_node &nb = nodes[ b ];

    // constant folding (division by zero stays unfolded and traps at eval)
    if ( na.is_const() && nb.is_const() )
        if ( auto v = fold_binary( op, na.payload, nb.payload, na.width ) )
            return constant( *v, rw );

    if ( term_is_commutative( op ) && b < a )
        std::swap( a, b );

    auto is_zero = [ & ]( term_id t ) { return nodes[ t ].is_const() && nodes[ t ].payload == 0; };
    auto is_one = [ & ]( term_id t ) { return nodes[ t ].is_const() && nodes[ t ].payload == 1; };

    switch ( op )
    {
        case term_op::add:
        case term_op::bor:
        case term_op::bxor:
            if ( is_zero( a ) )
                return b;
            if ( is_zero( b ) )
                return a;
            break;
        case term_op::mul:
            if ( is_one( a ) )
                return b;
            if ( is_one( b ) )
                return a;
            if ( is_zero( a ) || is_zero( b ) )
                return constant( 0, rw );
            break;
        case term_op::shl:
            if ( is_zero( b ) )
                return a;
            break;
        default:
            break;
    }

    return put( { op, uint8_t( rw ), a, b, 0 } );
}

inline term_id apply_cast( term_arena &ar, term_op op, term_id a, int to_width )
{
    const term_node &na = ar[ a ];
    if ( na.is_const() )
    {
        switch ( op )
        {
            case term_op::zext:  return ar.constant( bits::zext( na.payload, na.width, to_width ), to_width );
            case term_op::sext:  return ar.constant( bits::sext( na.payload, na.width, to_width ), to_width );
            case term_op::trunc: return ar.constant( bits::trunc( na.payload, to_width ), to_width );
            default: break;
        }
    }
    return ar.put( { op, uint8_t( to_width ), a, no_term, 0 } );
}

// a path condition: assume-generated conjuncts plus division guards that
// ride along in every solver query but do not count as path entries
struct path_condition
{
    std::vector< term_id > entries;
    std::vector< term_id > guards;

    std::vector< term_id > all() const
    {
        std::vector< term_id > r = entries;
        r.insert( r.end(), guards.begin(), guards.end() );
        return r;
    }

    friend bool operator==( const path_condition &, const path_condition & ) = default;
};

inline void pc_assume( term_arena &ar, path_condition &pc, term_id cond, int direction )
{
    pc.entries.push_back( direction ? cond : ar.negate( cond ) );
}

// per-path symbol inventory: creation order is the identity used everywhere
struct symbol_table
{
    std::vector< uint8_t > widths;

    uint32_t fresh( int width )
    {
        widths.push_back( uint8_t( width ) );
        return uint32_t( widths.size() - 1 );
    }

    size_t count() const { return widths.size(); }
    uint64_t total_bits() const
    {
        uint64_t n = 0;
        for ( auto w : widths )
            n += w;
        return n;
    }

    friend bool operator==( const symbol_table &, const symbol_table & ) = default;
};

} // namespace symtrans
