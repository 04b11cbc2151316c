#pragma once

#include <map>
#include <sstream>
#include <string>

#include "term.hpp"

namespace symtrans
{

/*
 * Deterministic SMT-LIB2 (QF_BV) serialization of path-condition queries.
 * Symbols are declared in creation order as s0, s1, ...; every internal
 * term node reachable from the assertion set is emitted post-order as a
 * define-fun t<id>, giving shared subterms a single definition. Identical
 * queries serialize byte-identically, which makes the text usable as a
 * memoization key.
 */

struct solver_query
{
    std::vector< uint8_t > symbol_widths; // creation order
    std::vector< term_id > asserts;       // width-1 terms, conjunction
    bool want_model = true;
};

namespace smt
{

inline void emit_const( std::ostream &os, uint64_t value, int width )
{
    if ( width % 4 == 0 )
    {
        static const char *digits = "0123456789abcdef";
        std::string s;
        for ( int i = 0; i < width / 4; ++i )
            s += digits[ ( value >> ( width - 4 * ( i + 1 ) ) ) & 0xf ];
        os << "#x" << s;
    }
    else
    {
        os << "#b";
        for ( int i = width - 1; i >= 0; --i )
            os << ( ( value >> i ) & 1 );
    }
}

inline const char *bv_op_name( term_op op )
{
    switch ( op )
    {
        case term_op::add: return "bvadd";   case term_op::sub: return "bvsub";
        case term_op::mul: return "bvmul";   case term_op::udiv: return "bvudiv";
        case term_op::sdiv: return "bvsdiv"; case term_op::urem: return "bvurem";
        case term_op::srem: return "bvsrem"; case term_op::band: return "bvand";
        case term_op::bor: return "bvor";    case term_op::bxor: return "bvxor";
        case term_op::shl: return "bvshl";   case term_op::lshr: return "bvlshr";
        case term_op::ashr: return "bvashr";
        case term_op::ult: return "bvult";   case term_op::ule: return "bvule";
        case term_op::ugt: return "bvugt";   case term_op::uge: return "bvuge";
        case term_op::slt: return "bvslt";   case term_op::sle: return "bvsle";
        case term_op::sgt: return "bvsgt";   case term_op::sge: return "bvsge";
        default: return "?";
    }
}

inline void emit_ref( std::ostream &os, const term_arena &ar, term_id id )
{
    const term_node &n = ar[ id ];
    if ( n.is_const() )
        emit_const( os, n.payload, n.width );
    else if ( n.is_symbol() )
        os << "s" << n.payload;
    else
        os << "t" << id;
}

inline void emit_node_body( std::ostream &os, const term_arena &ar, term_id id )
{
    const term_node &n = ar[ id ];
    switch ( n.op )
    {
        case term_op::zext:
            os << "((_ zero_extend " << int( n.width ) - int( ar[ n.lhs ].width ) << ") ";
            emit_ref( os, ar, n.lhs );
            os << ")";
            return;
        case term_op::sext:
            os << "((_ sign_extend " << int( n.width ) - int( ar[ n.lhs ].width ) << ") ";
            emit_ref( os, ar, n.lhs );
            os << ")";
            return;
        case term_op::trunc:
            os << "((_ extract " << int( n.width ) - 1 << " 0) ";
            emit_ref( os, ar, n.lhs );
            os << ")";
            return;
        default:
            break;
    }
    if ( term_is_cmp( n.op ) )
    {
        os << "(ite (";
        if ( n.op == term_op::eq )
            os << "= ";
        else if ( n.op == term_op::ne )
            os << "distinct ";
        else
            os << bv_op_name( n.op ) << " ";
        emit_ref( os, ar, n.lhs );
        os << " ";
        emit_ref( os, ar, n.rhs );
        os << ") #b1 #b0)";
        return;
    }
    os << "(" << bv_op_name( n.op ) << " ";
    emit_ref( os, ar, n.lhs );
    os << " ";
    emit_ref( os, ar, n.rhs );
    os << ")";
}

// reachable internal nodes in ascending id order (children precede parents)
inline std::vector< term_id > reachable_internal( const term_arena &ar,
                                                  const std::vector< term_id > &roots )
{
    std::vector< term_id > stack = roots;
    std::vector< bool > seen( ar.size(), false );
    std::vector< term_id > out;
    while ( !stack.empty() )
    {
        term_id id = stack.back();
        stack.pop_back();
        if ( id == no_term || seen[ id ] )
            continue;
        seen[ id ] = true;
        const term_node &n = ar[ id ];
        if ( n.is_const() || n.is_symbol() )
            continue;
        out.push_back( id );
        stack.push_back( n.lhs );
        if ( n.rhs != no_term )
            stack.push_back( n.rhs );
    }
    std::sort( out.begin(), out.end() );
    return out;
}

} // namespace smt

// the model request is sent separately, after a sat answer
inline std::string model_request_line( size_t nsyms )
{
    std::ostringstream os;
    os << "(get-value (";
    for ( size_t i = 0; i < nsyms; ++i )
        os << ( i ? " s" : "s" ) << i;
    os << "))\n";
    return os.str();
}

// the exact per-query byte stream handed to an external solver process
inline std::string serialize_query( const term_arena &ar, const solver_query &q )
{
    std::ostringstream os;
    for ( size_t i = 0; i < q.symbol_widths.size(); ++i )
        os << "(declare-const s" << i << " (_ BitVec " << int( q.symbol_widths[ i ] ) << "))\n";
    for ( term_id id : smt::reachable_internal( ar, q.asserts ) )
    {
        os << "(define-fun t" << id << " () (_ BitVec " << int( ar[ id ].width ) << ") ";
        smt::emit_node_body( os, ar, id );
        os << ")\n";
    }
    for ( term_id id : q.asserts )
    {
        os << "(assert (= ";
        smt::emit_ref( os, ar, id );
        os << " #b1))\n";
    }
    os << "(check-sat)\n";
    if ( q.want_model && !q.symbol_widths.empty() )
        os << model_request_line( q.symbol_widths.size() );
    return os.str();
}

} // namespace symtrans
