#pragma once

#include "vm.hpp"

namespace symtrans
{

/*
 * State images are value-like and transferable between workers: every term
 * handle reachable from the state (registers, shadow entries, the path
 * condition) is extracted into a portable node graph at snapshot time and
 * re-interned into the target worker's arena on restore. Hash-consing makes
 * the round trip cheap and id-stable within one worker.
 */
struct state_image
{
    machine_state state;            // term handles rewritten to local graph ids
    std::vector< term_node > terms; // local graph, children precede parents
    uint64_t digest = 0;            // concrete-parts digest (dedup bucket key)
    std::vector< uint8_t > concrete_blob;
};

namespace detail
{

// applies f to every term handle stored in the state
template< typename F >
void visit_term_handles( machine_state &st, const domain_registry *reg, F f )
{
    auto is_term_domain = [ & ]( uint8_t id )
    {
        if ( !reg )
            return false;
        auto *d = reg->by_id( id );
        return d && d->handles_are_terms();
    };

    for ( auto &fr : st.stack )
        for ( auto &r : fr.regs )
            if ( r.is_abstract() && is_term_domain( r.domain ) )
                f( r.payload );
    for ( auto &[ key, entry ] : st.shadow )
        if ( is_term_domain( entry.domain ) )
            f( entry.frozen );
    for ( auto &t : st.pc.entries )
    {
        uint64_t h = t;
        f( h );
        t = term_id( h );
    }
    for ( auto &t : st.pc.guards )
    {
        uint64_t h = t;
        f( h );
        t = term_id( h );
    }
}

inline void blob_u64( std::vector< uint8_t > &b, uint64_t v )
{
    for ( int i = 0; i < 8; ++i )
        b.push_back( uint8_t( v >> ( 8 * i ) ) );
}

inline uint64_t fnv1a( const std::vector< uint8_t > &bytes )
{
    uint64_t h = 0xcbf29ce484222325ull;
    for ( uint8_t c : bytes )
    {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

// serialize the concrete parts: registers, memory, program counter, call
// stack, shadow static types and the domain cells -- but neither term
// structure nor the path condition
inline std::vector< uint8_t > concrete_blob_of( const machine_state &st )
{
    std::vector< uint8_t > b;
    blob_u64( b, st.stack.size() );
    for ( auto &fr : st.stack )
    {
        blob_u64( b, fr.fn );
        blob_u64( b, fr.block );
        blob_u64( b, fr.inst );
        blob_u64( b, fr.ret_reg );
        blob_u64( b, fr.regs.size() );
        for ( auto &r : fr.regs )
        {
            b.push_back( uint8_t( r.tag ) );
            b.push_back( uint8_t( r.static_type.kind ) );
            b.push_back( r.static_type.bits );
            if ( r.is_concrete() )
                blob_u64( b, r.payload );
        }
    }
    blob_u64( b, st.segments.size() );
    for ( auto &seg : st.segments )
    {
        b.push_back( seg.alive );
        blob_u64( b, seg.bytes.size() );
        b.insert( b.end(), seg.bytes.begin(), seg.bytes.end() );
    }
    blob_u64( b, st.shadow.size() );
    for ( auto &[ key, e ] : st.shadow )
    {
        blob_u64( b, key.first );
        blob_u64( b, key.second );
        blob_u64( b, e.size );
        b.push_back( uint8_t( e.stype.kind ) );
        b.push_back( e.stype.bits );
        b.push_back( e.domain );
    }
    blob_u64( b, st.dstate.cells.size() );
    for ( auto c : st.dstate.cells )
        blob_u64( b, c );
    b.push_back( st.halted );
    return b;
}

} // namespace detail

inline state_image snapshot( const vm &w, const machine_state &st )
{
    state_image img;
    img.state = st;
    img.concrete_blob = detail::concrete_blob_of( st );
    img.digest = detail::fnv1a( img.concrete_blob );

    // extract the reachable term subgraph and remap handles to local ids
    std::vector< uint64_t > roots;
    detail::visit_term_handles( img.state, w.registry,
                                [ & ]( uint64_t &h ) { roots.push_back( h ); } );
    if ( roots.empty() )
        return img;

    std::unordered_map< term_id, uint32_t > local;
    std::vector< term_id > order;
    std::vector< term_id > stack( roots.begin(), roots.end() );
    while ( !stack.empty() )
    {
        term_id id = stack.back();
        stack.pop_back();
        if ( id == no_term || local.count( id ) )
            continue;
        local.emplace( id, 0 );
        order.push_back( id );
        stack.push_back( w.arena[ id ].lhs );
        stack.push_back( w.arena[ id ].rhs );
    }
    std::sort( order.begin(), order.end() ); // children precede parents
    for ( uint32_t i = 0; i < order.size(); ++i )
        local[ order[ i ] ] = i;
    for ( term_id id : order )
    {
        term_node n = w.arena[ id ];
        if ( n.lhs != no_term )
            n.lhs = local.at( n.lhs );
        if ( n.rhs != no_term )
            n.rhs = local.at( n.rhs );
        img.terms.push_back( n );
    }
    detail::visit_term_handles( img.state, w.registry,
                                [ & ]( uint64_t &h ) { h = local.at( term_id( h ) ); } );
    return img;
}

inline machine_state restore( vm &w, const state_image &img )
{
    machine_state st = img.state;
    if ( img.terms.empty() )
        return st;
    std::vector< term_id > to_arena( img.terms.size() );
    for ( uint32_t i = 0; i < img.terms.size(); ++i )
    {
        term_node n = img.terms[ i ];
        if ( n.lhs != no_term )
            n.lhs = to_arena[ n.lhs ];
        if ( n.rhs != no_term )
            n.rhs = to_arena[ n.rhs ];
        to_arena[ i ] = w.arena.put( n );
    }
    detail::visit_term_handles( st, w.registry,
                                [ & ]( uint64_t &h ) { h = to_arena[ size_t( h ) ]; } );
    return st;
}

} // namespace symtrans
