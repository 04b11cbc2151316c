#include "harness.hpp"

using namespace symtrans;

TEST_CASE( "single instruction parses into the expected shape" )
{
    auto m = harness::load_text( R"(
fn @f(%a: i32, %b: i32) -> i32 {
entry:
  %r = add i32 %a, %b
  ret i32 %r
}
)" );
    const function &fn = m.functions[ 0 ];
    const instruction &in = fn.blocks[ 0 ].insts[ 0 ];
    CHECK( in.op == opcode::add );
    CHECK( in.result_type == t_int( 32 ) );
    CHECK( in.args[ 0 ].is_reg() );
    CHECK( fn.reg_names[ in.args[ 0 ].reg ] == "a" );
}

TEST_CASE( "use of an undeclared register is an SSA parse error" )
{
    auto pr = parse_module( R"(
fn @f(%a: i32) -> i32 {
entry:
  %r = add i32 %a, %b
  ret i32 %r
}
)" );
    REQUIRE( !pr.ok() );
    CHECK( join_diags( pr.errors ).find( "undefined register %b" ) != std::string::npos );
}

TEST_CASE( "double definition is an SSA parse error" )
{
    auto pr = parse_module( R"(
fn @f() -> i32 {
entry:
  %r = add i32 1, 2
  %r = add i32 3, 4
  ret i32 %r
}
)" );
    REQUIRE( !pr.ok() );
    CHECK( join_diags( pr.errors ).find( "defined more than once" ) != std::string::npos );
}

TEST_CASE( "parse errors carry line positions" )
{
    auto pr = parse_module( "fn @f() -> i32 {\nentry:\n  %r = bogus i32 1\n}\n" );
    REQUIRE( !pr.ok() );
    CHECK( pr.errors[ 0 ].line == 3 );
}

TEST_CASE( "literals must fit their width" )
{
    auto pr = parse_module( R"(
fn @f() -> i8 {
entry:
  %r = add i8 300, 1
  ret i8 %r
}
)" );
    REQUIRE( !pr.ok() );
    CHECK( join_diags( pr.errors ).find( "does not fit" ) != std::string::npos );
}

TEST_CASE( "negative literals wrap to two's complement" )
{
    auto m = harness::load_text( R"(
fn @f() -> i8 {
entry:
  %r = add i8 -1, 0
  ret i8 %r
}
)" );
    CHECK( m.functions[ 0 ].blocks[ 0 ].insts[ 0 ].args[ 0 ].imm == 255 );
}

TEST_CASE( "block lacking a terminator is a diagnostic" )
{
    auto pr = parse_module( R"(
fn @f() -> i32 {
entry:
  %r = add i32 1, 2
}
)" );
    REQUIRE( pr.ok() );
    auto ds = validate( *pr.module );
    REQUIRE( !ds.empty() );
    CHECK( join_diags( ds ).find( "missing terminator" ) != std::string::npos );
}

TEST_CASE( "phi in the middle of a block is a diagnostic" )
{
    auto pr = parse_module( R"(
fn @f(%a: i32) -> i32 {
entry:
  br next
next:
  %r = add i32 %a, 1
  %p = phi i32 [ %a, entry ]
  ret i32 %p
}
)" );
    REQUIRE( pr.ok() );
    auto ds = validate( *pr.module );
    CHECK( join_diags( ds ).find( "phi not at block head" ) != std::string::npos );
}

TEST_CASE( "use before dominating definition is rejected" )
{
    auto pr = parse_module( R"(
fn @f(%a: i32) -> i32 {
entry:
  %c = icmp ult i32 %a, 10
  br %c, take, skip
take:
  %x = add i32 %a, 1
  br skip
skip:
  %r = add i32 %x, 1
  ret i32 %r
}
)" );
    REQUIRE( pr.ok() );
    auto ds = validate( *pr.module );
    CHECK( join_diags( ds ).find( "not dominated" ) != std::string::npos );
}

TEST_CASE( "operand type must match the definition" )
{
    auto pr = parse_module( R"(
fn @f(%a: i8) -> i32 {
entry:
  %r = add i32 %a, 1
  ret i32 %r
}
)" );
    REQUIRE( pr.ok() );
    auto ds = validate( *pr.module );
    CHECK( join_diags( ds ).find( "disagrees with definition" ) != std::string::npos );
}

TEST_CASE( "intrinsic signatures are validated" )
{
    auto pr = parse_module( R"(
fn @main() -> i32 {
entry:
  %x = call i16 @sym.i32()
  ret i32 0
}
)" );
    REQUIRE( pr.ok() );
    auto ds = validate( *pr.module );
    CHECK( !ds.empty() );
}

TEST_CASE( "well-formed corpus validates and round-trips" )
{
    for ( auto &path : harness::corpus_files() )
    {
        DYNAMIC_SECTION( path )
        {
            ir_module m = harness::load( path );
            std::string once = print_module( m );
            auto pr = parse_module( once );
            REQUIRE( pr.ok() );
            CHECK( structurally_equal( m, *pr.module ) );
            // printing is idempotent after one normalization pass
            CHECK( print_module( *pr.module ) == once );
        }
    }
}

namespace
{

// brute-force dominance: d dominates b iff removing d makes b unreachable
bool brute_dominates( const function &fn, uint32_t d, uint32_t b )
{
    if ( d == b )
        return true;
    if ( d == 0 )
        return true;
    std::vector< bool > seen( fn.blocks.size(), false );
    std::vector< uint32_t > stack{ 0 };
    seen[ 0 ] = true;
    while ( !stack.empty() )
    {
        uint32_t cur = stack.back();
        stack.pop_back();
        if ( cur == d )
            continue; // the removed node
        const instruction &t = fn.blocks[ cur ].terminator();
        if ( t.op != opcode::br )
            continue;
        for ( uint32_t nxt : { t.target, t.is_cond_br() ? t.target_false : t.target } )
            if ( nxt != no_block && !seen[ nxt ] )
            {
                seen[ nxt ] = true;
                stack.push_back( nxt );
            }
    }
    return !seen[ b ];
}

} // namespace

TEST_CASE( "dominator computation agrees with the removal oracle on the corpus" )
{
    for ( auto &path : harness::corpus_files() )
    {
        ir_module m = harness::load( path );
        for ( auto &fn : m.functions )
        {
            auto dom = compute_dominators( fn );
            for ( uint32_t b = 0; b < fn.blocks.size(); ++b )
            {
                // restrict to reachable blocks; unreachable ones keep full sets
                std::vector< bool > reach( fn.blocks.size(), false );
                std::vector< uint32_t > stack{ 0 };
                reach[ 0 ] = true;
                while ( !stack.empty() )
                {
                    uint32_t cur = stack.back();
                    stack.pop_back();
                    const instruction &t = fn.blocks[ cur ].terminator();
                    if ( t.op != opcode::br )
                        continue;
                    uint32_t succ[ 2 ] = { t.target,
                                           t.is_cond_br() ? t.target_false : t.target };
                    for ( uint32_t nxt : succ )
                        if ( !reach[ nxt ] )
                        {
                            reach[ nxt ] = true;
                            stack.push_back( nxt );
                        }
                }
                if ( !reach[ b ] )
                    continue;
                for ( uint32_t d = 0; d < fn.blocks.size(); ++d )
                {
                    if ( !reach[ d ] )
                        continue;
                    INFO( path << " " << fn.name << " dom(" << fn.blocks[ b ].label << ","
                               << fn.blocks[ d ].label << ")" );
                    CHECK( dom[ b ][ d ] == brute_dominates( fn, d, b ) );
                }
            }
        }
    }
}

TEST_CASE( "aggregate layout is packed with strictly increasing offsets" )
{
    std::mt19937_64 rng( 7 );
    for ( int iter = 0; iter < 200; ++iter )
    {
        // random records of random scalars and small arrays
        mem_type rec;
        rec.kind = mem_type::k::record;
        int nfields = 1 + int( rng() % 5 );
        for ( int i = 0; i < nfields; ++i )
        {
            int pick = int( rng() % 7 );
            vtype scalars[] = { t_int( 1 ), t_int( 8 ), t_int( 16 ), t_int( 32 ),
                                t_int( 64 ), t_ptr };
            if ( pick < 6 )
                rec.sub.push_back( mt_scalar( scalars[ pick ] ) );
            else
            {
                mem_type arr;
                arr.kind = mem_type::k::array;
                arr.count = rng() % 4;
                arr.sub.push_back( mt_scalar( t_int( 16 ) ) );
                rec.sub.push_back( arr );
            }
        }
        uint64_t sum = 0;
        for ( size_t i = 0; i < rec.sub.size(); ++i )
        {
            CHECK( rec.field_offset( i ) == sum );
            sum += rec.sub[ i ].byte_size();
        }
        CHECK( rec.byte_size() == sum );

        mem_type arr;
        arr.kind = mem_type::k::array;
        arr.count = rng() % 17;
        arr.sub.push_back( rec );
        CHECK( arr.byte_size() == arr.count * rec.byte_size() );
    }
}

TEST_CASE( "empty module prints as empty text" )
{
    auto pr = parse_module( "" );
    REQUIRE( pr.ok() );
    CHECK( print_module( *pr.module ).empty() );
}
