#include "harness.hpp"

#include <symtrans/parity_domain.hpp>
#include <symtrans/term_domain.hpp>

using namespace symtrans;

namespace
{

struct world
{
    term_arena arena;
    symbol_table symbols;
    path_condition pc;
    domain_state dstate;
    brute_force_solver solver;
    term_domain term;
    parity_domain parity;

    world()
    {
        term.id = 1;
        parity.id = 2;
    }

    exec_ctx ctx() { return exec_ctx{ arena, symbols, pc, dstate, &solver }; }
};

uint64_t parity_of_bits( uint64_t v ) { return v & 1; }

} // namespace

TEST_CASE( "lifter: concrete fast path computes without allocating a handle" )
{
    world w;
    lifter l = synthesize_lifter_binary( opcode::add, 32, w.term );
    auto ctx = w.ctx();
    auto r = l.dispatch_binary( abstract_value::concrete( 2, t_int( 32 ) ),
                                abstract_value::concrete( 3, t_int( 32 ) ), ctx );
    CHECK( r.value.is_concrete() );
    CHECK( r.value.payload == 5 );
    CHECK( w.arena.size() == 0 ); // no term was built

    // purity against the concrete ALU across every opcode at width 8
    std::mt19937_64 rng( 5 );
    for ( int op = 0; op <= int( opcode::ashr ); ++op )
    {
        lifter l8 = synthesize_lifter_binary( opcode( op ), 8, w.term );
        for ( int i = 0; i < 10000; ++i )
        {
            uint64_t a = rng() & 0xff, b = rng() & 0xff;
            auto ctx2 = w.ctx();
            auto out = l8.dispatch_binary( abstract_value::concrete( a, t_int( 8 ) ),
                                           abstract_value::concrete( b, t_int( 8 ) ), ctx2 );
            auto expect = fold_binary( term_op_of( opcode( op ) ), a, b, 8 );
            if ( !expect )
                CHECK( out.trap_div_zero );
            else
            {
                CHECK( !out.trap_div_zero );
                CHECK( out.value.payload == *expect );
            }
        }
    }
    CHECK( w.arena.size() == 0 );
}

TEST_CASE( "lifter: mixed operands lift the concrete side first" )
{
    world w;
    auto ctx = w.ctx();
    handle_t hx = w.term.fresh_input( 32, ctx );
    lifter l = synthesize_lifter_binary( opcode::add, 32, w.term );
    auto r = l.dispatch_binary( abstract_value::abstract( w.term.id, hx, t_int( 32 ) ),
                                abstract_value::concrete( 1, t_int( 32 ) ), ctx );
    REQUIRE( r.value.is_abstract() );
    const term_node &n = w.arena[ term_id( r.value.payload ) ];
    CHECK( n.op == term_op::add );
    bool has_sym = w.arena[ n.lhs ].is_symbol() || w.arena[ n.rhs ].is_symbol();
    bool has_one = ( w.arena[ n.lhs ].is_const() && w.arena[ n.lhs ].payload == 1 ) ||
                   ( w.arena[ n.rhs ].is_const() && w.arena[ n.rhs ].payload == 1 );
    CHECK( has_sym );
    CHECK( has_one );
}

TEST_CASE( "lifter result equals the direct domain op on abstract pairs" )
{
    world w;
    auto ctx = w.ctx();
    handle_t hx = w.term.fresh_input( 8, ctx );
    handle_t hy = w.term.fresh_input( 8, ctx );
    std::mt19937_64 rng( 6 );
    for ( int op = 0; op <= int( opcode::ashr ); ++op )
    {
        lifter l = synthesize_lifter_binary( opcode( op ), 8, w.term );
        auto via_lifter = l.dispatch_binary( abstract_value::abstract( 1, hx, t_int( 8 ) ),
                                             abstract_value::abstract( 1, hy, t_int( 8 ) ), ctx );
        auto direct = w.term.op_binary( opcode( op ), 8, hx, hy, ctx );
        REQUIRE( via_lifter.value.is_abstract() );
        CHECK( via_lifter.value.payload == direct );
    }
    for ( int p = 0; p <= int( icmp_pred::sge ); ++p )
    {
        lifter l = synthesize_lifter_icmp( icmp_pred( p ), 8, w.term );
        auto via_lifter = l.dispatch_binary( abstract_value::abstract( 1, hx, t_int( 8 ) ),
                                             abstract_value::abstract( 1, hy, t_int( 8 ) ), ctx );
        auto direct = w.term.op_icmp( icmp_pred( p ), 8, hx, hy, ctx );
        CHECK( via_lifter.value.payload == direct );
    }
}

TEST_CASE( "synthesis is deterministic and refuses unsupported ops" )
{
    struct crippled : domain_descriptor
    {
        crippled() { domain_name = "crippled"; }
        bool supports( opcode op, icmp_pred, int ) const override
        {
            return op != opcode::udiv;
        }
        handle_t op_binary( opcode, int, handle_t, handle_t, exec_ctx & ) override { return 0; }
        handle_t op_icmp( icmp_pred, int, handle_t, handle_t, exec_ctx & ) override { return 0; }
        handle_t op_cast( opcode, int, int, handle_t, exec_ctx & ) override { return 0; }
        handle_t lift( uint64_t, vtype, exec_ctx & ) override { return 0; }
        std::optional< uint64_t > lower( handle_t, vtype, exec_ctx &, std::string & ) override
        {
            return std::nullopt;
        }
        handle_t fresh_input( int, exec_ctx & ) override { return 0; }
        assume_effect assume( handle_t, int, exec_ctx & ) override { return assume_effect::ok; }
        decided decide_i1( handle_t, const exec_ctx & ) const override
        {
            return decided::undetermined;
        }
    } d;

    CHECK_THROWS_AS( synthesize_lifter_binary( opcode::udiv, 8, d ), unsupported_op );
    lifter a = synthesize_lifter_binary( opcode::add, 8, d );
    lifter b = synthesize_lifter_binary( opcode::add, 8, d );
    CHECK( a.op == b.op );
    CHECK( a.width == b.width );
    CHECK( a.dom == b.dom );
}

TEST_CASE( "term lift embeds constants; lower is the inverse on constants" )
{
    world w;
    auto ctx = w.ctx();
    handle_t h = w.term.lift( 5, t_int( 32 ), ctx );
    CHECK( w.arena[ term_id( h ) ].is_const() );
    CHECK( w.arena[ term_id( h ) ].payload == 5 );

    std::string err;
    auto back = w.term.lower( h, t_int( 32 ), ctx, err );
    REQUIRE( back );
    CHECK( *back == 5 );
    CHECK( w.pc.entries.empty() ); // the pin on a constant is a tautology

    handle_t h42 = w.term.lift( 42, t_int( 8 ), ctx );
    auto b42 = w.term.lower( h42, t_int( 8 ), ctx, err );
    REQUIRE( b42 );
    CHECK( *b42 == 42 );
}

TEST_CASE( "term lower is model-based with pinning" )
{
    world w;
    auto ctx = w.ctx();
    handle_t hx = w.term.fresh_input( 8, ctx );
    // constrain x to the unique value 9
    w.pc.entries.push_back( w.arena.apply( term_op::ult, term_id( hx ),
                                           w.arena.constant( 10, 8 ) ) );
    w.pc.entries.push_back( w.arena.apply( term_op::ugt, term_id( hx ),
                                           w.arena.constant( 8, 8 ) ) );
    std::string err;
    auto v = w.term.lower( hx, t_int( 8 ), ctx, err );
    REQUIRE( v );
    CHECK( *v == 9 );
    // and the pinning constraint was appended
    REQUIRE( w.pc.entries.size() == 3 );
    uint64_t nine[] = { 9 }, eight[] = { 8 };
    CHECK( *eval_term( w.arena, w.pc.entries[ 2 ], nine ) == 1 );
    CHECK( *eval_term( w.arena, w.pc.entries[ 2 ], eight ) == 0 );
}

TEST_CASE( "term lower refuses on an infeasible path" )
{
    world w;
    auto ctx = w.ctx();
    handle_t hx = w.term.fresh_input( 8, ctx );
    term_id lt = w.arena.apply( term_op::ult, term_id( hx ), w.arena.constant( 10, 8 ) );
    w.pc.entries.push_back( lt );
    w.pc.entries.push_back( w.arena.negate( lt ) );
    std::string err;
    CHECK( !w.term.lower( hx, t_int( 8 ), ctx, err ) );
    CHECK( !err.empty() );
}

TEST_CASE( "parity lift and transfers follow the lattice" )
{
    world w;
    auto ctx = w.ctx();
    handle_t six = w.parity.lift( 6, t_int( 32 ), ctx );
    handle_t seven = w.parity.lift( 7, t_int( 32 ), ctx );
    CHECK( parity_domain::parity_of( ctx, six ) == parity_domain::even );
    CHECK( parity_domain::parity_of( ctx, seven ) == parity_domain::odd );

    handle_t undef = w.parity.fresh_input( 32, ctx );
    CHECK( parity_domain::parity_of( ctx, undef ) == parity_domain::undef );

    // add(even, undef) -> undef (absorption); lifted constants fold exactly
    handle_t a = w.parity.op_binary( opcode::add, 32, six, undef, ctx );
    CHECK( parity_domain::parity_of( ctx, a ) == parity_domain::undef );
    handle_t b = w.parity.op_binary( opcode::mul, 32, six, seven, ctx );
    CHECK( parity_domain::parity_of( ctx, b ) == parity_domain::even );
    CHECK( parity_domain::const_value( ctx, b ) == 42 );
}

TEST_CASE( "parity soundness: exhaustive at width 8" )
{
    // for every transfer function and all operand pairs, the parity of the
    // concrete result is within the abstract result's concretization
    opcode ops[] = { opcode::add, opcode::sub, opcode::mul, opcode::band };
    for ( opcode op : ops )
    {
        for ( uint64_t a = 0; a < 256; ++a )
            for ( uint64_t b = 0; b < 256; ++b )
            {
                world w;
                auto ctx = w.ctx();
                // abstract inputs carrying only parity (not lifted constants)
                handle_t ha = parity_domain::cell( ctx, parity_of_bits( a ) );
                handle_t hb = parity_domain::cell( ctx, parity_of_bits( b ) );
                handle_t hr = w.parity.op_binary( op, 8, ha, hb, ctx );
                uint64_t rp = parity_domain::parity_of( ctx, hr );
                uint64_t concrete = *fold_binary( term_op_of( op ), a, b, 8 );
                if ( rp != parity_domain::undef )
                    REQUIRE( rp == parity_of_bits( concrete ) );
            }
    }
}

TEST_CASE( "parity undef is absorbing outside the mask pattern" )
{
    world w;
    auto ctx = w.ctx();
    handle_t undef = w.parity.fresh_input( 8, ctx );
    handle_t even_h = parity_domain::cell( ctx, parity_domain::even );
    for ( opcode op : { opcode::add, opcode::sub, opcode::mul, opcode::udiv, opcode::bxor,
                        opcode::shl } )
    {
        handle_t r = w.parity.op_binary( op, 8, even_h, undef, ctx );
        CHECK( parity_domain::parity_of( ctx, r ) == parity_domain::undef );
    }
    // the recognized pattern: and with lifted constant 1 keeps the derivation
    handle_t one = w.parity.lift( 1, t_int( 8 ), ctx );
    handle_t masked = w.parity.op_binary( opcode::band, 8, undef, one, ctx );
    CHECK( parity_domain::deriv_of( ctx, masked ) == parity_domain::deriv::mask_of );
}

TEST_CASE( "parity assume refines through the mask-compare pattern" )
{
    world w;
    auto ctx = w.ctx();
    handle_t x = w.parity.fresh_input( 8, ctx );
    handle_t one = w.parity.lift( 1, t_int( 8 ), ctx );
    handle_t masked = w.parity.op_binary( opcode::band, 8, x, one, ctx );
    handle_t zero = w.parity.lift( 0, t_int( 8 ), ctx );
    handle_t cond = w.parity.op_icmp( icmp_pred::eq, 8, masked, zero, ctx );

    SECTION( "direction 1 refines to even" )
    {
        CHECK( w.parity.assume( cond, 1, ctx ) == assume_effect::ok );
        CHECK( parity_domain::parity_of( ctx, x ) == parity_domain::even );
    }
    SECTION( "direction 0 refines to odd" )
    {
        CHECK( w.parity.assume( cond, 0, ctx ) == assume_effect::ok );
        CHECK( parity_domain::parity_of( ctx, x ) == parity_domain::odd );
    }
    SECTION( "conflicting refinement is infeasible" )
    {
        REQUIRE( w.parity.assume( cond, 1, ctx ) == assume_effect::ok );
        handle_t masked2 = w.parity.op_binary( opcode::band, 8, x, one, ctx );
        handle_t cond2 = w.parity.op_icmp( icmp_pred::eq, 8, masked2, zero, ctx );
        // x is known even now, so the comparison folds to true and assuming
        // the false direction contradicts it
        CHECK( w.parity.assume( cond2, 0, ctx ) == assume_effect::infeasible );
    }
    SECTION( "unrecognized conditions leave the state unchanged" )
    {
        handle_t other = w.parity.fresh_input( 8, ctx );
        handle_t cond2 = w.parity.op_icmp( icmp_pred::ult, 8, x, other, ctx );
        CHECK( w.parity.assume( cond2, 1, ctx ) == assume_effect::ok );
        CHECK( parity_domain::parity_of( ctx, x ) == parity_domain::undef );
    }
}

TEST_CASE( "parity lower refuses non-singletons" )
{
    world w;
    auto ctx = w.ctx();
    handle_t even_h = parity_domain::cell( ctx, parity_domain::even );
    std::string err;
    CHECK( !w.parity.lower( even_h, t_int( 8 ), ctx, err ) );

    // i1 parities and lifted constants are singletons
    handle_t odd1 = parity_domain::cell( ctx, parity_domain::odd );
    auto v = w.parity.lower( odd1, t_i1, ctx, err );
    REQUIRE( v );
    CHECK( *v == 1 );
    handle_t c = w.parity.lift( 77, t_int( 8 ), ctx );
    auto cv = w.parity.lower( c, t_int( 8 ), ctx, err );
    REQUIRE( cv );
    CHECK( *cv == 77 );
}

TEST_CASE( "soundness of lift: concretization contains the lifted value" )
{
    world w;
    auto ctx = w.ctx();
    std::mt19937_64 rng( 12 );
    for ( int i = 0; i < 1000; ++i )
    {
        uint64_t v = rng() & 0xff;
        handle_t hp = w.parity.lift( v, t_int( 8 ), ctx );
        uint64_t p = parity_domain::parity_of( ctx, hp );
        CHECK( ( p == parity_domain::undef || p == ( v & 1 ) ) );

        handle_t ht = w.term.lift( v, t_int( 8 ), ctx );
        // the term concretization of a constant is exactly {v}
        CHECK( w.arena[ term_id( ht ) ].payload == v );
    }
}
