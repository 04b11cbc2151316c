#include "harness.hpp"

#include <symtrans/parity_domain.hpp>
#include <symtrans/snapshot.hpp>
#include <symtrans/term_domain.hpp>
#include <symtrans/vm.hpp>

using namespace symtrans;

namespace
{

domain_registry &reg()
{
    static domain_registry r = []
    {
        domain_registry x;
        x.add( std::make_unique< term_domain >() );
        x.add( std::make_unique< parity_domain >() );
        return x;
    }();
    return r;
}

struct run_result
{
    vm_event::kind kind;
    uint64_t exit_code = 0;
    trap_kind trap = trap_kind::internal;
    machine_state st;
};

run_result run_to_end( vm &w, const std::vector< uint32_t > &trail = {} )
{
    machine_state st = w.initial_state();
    size_t cursor = 0;
    for ( ;; )
    {
        vm_event ev = w.resume( st );
        switch ( ev.k )
        {
            case vm_event::kind::need_choice:
                REQUIRE( cursor < trail.size() );
                REQUIRE( !w.provide_choice( st, trail[ cursor++ ] ) );
                continue;
            case vm_event::kind::assume_recorded:
            case vm_event::kind::abstract_div:
            case vm_event::kind::div_unknown:
                continue;
            case vm_event::kind::abstract_assert:
                continue; // tests that need assert handling drive manually
            default:
                return { ev.k, ev.exit_code, ev.trap, std::move( st ) };
        }
    }
}

run_result run_text( const std::string &text, const std::vector< uint32_t > &trail = {} )
{
    static std::vector< std::unique_ptr< ir_module > > keep; // vm holds a reference
    keep.push_back( std::make_unique< ir_module >( harness::load_text( text ) ) );
    vm w( *keep.back(), &reg() );
    return run_to_end( w, trail );
}

} // namespace

TEST_CASE( "arithmetic wraps at width" )
{
    auto r = run_text( R"(
fn @main() -> i32 {
entry:
  %a = add i8 255, 1
  %b = zext i8 %a to i32
  ret i32 %b
}
)" );
    CHECK( r.kind == vm_event::kind::exited );
    CHECK( r.exit_code == 0 );
}

TEST_CASE( "division by zero traps" )
{
    auto r = run_text( R"(
fn @main() -> i32 {
entry:
  %z = sub i32 5, 5
  %q = udiv i32 7, %z
  ret i32 %q
}
)" );
    CHECK( r.kind == vm_event::kind::trapped );
    CHECK( r.trap == trap_kind::div_by_zero );
}

TEST_CASE( "load past the end of a segment traps" )
{
    auto r = run_text( R"(
fn @main() -> i32 {
entry:
  %p = alloca i32
  %q = ptradd %p, 2
  %v = load i32, %q
  ret i32 %v
}
)" );
    CHECK( r.kind == vm_event::kind::trapped );
    CHECK( r.trap == trap_kind::out_of_bounds );
}

TEST_CASE( "dead segments cannot be touched after return" )
{
    auto r = run_text( R"(
fn @leak() -> ptr {
entry:
  %p = alloca i32
  ret ptr %p
}

fn @main() -> i32 {
entry:
  %p = call ptr @leak()
  %v = load i32, %p
  ret i32 %v
}
)" );
    CHECK( r.kind == vm_event::kind::trapped );
    CHECK( r.trap == trap_kind::out_of_bounds );
}

TEST_CASE( "concrete factorial runs to exit printing 5040" )
{
    ir_module m = harness::load( harness::corpus_dir() + "/factorial_print.sir" );
    vm w( m, &reg() );
    auto r = run_to_end( w );
    CHECK( r.kind == vm_event::kind::exited );
    CHECK( r.exit_code == 0 );
    // 7! computed independently
    uint64_t f = 1;
    for ( int i = 2; i <= 7; ++i )
        f *= i;
    REQUIRE( r.st.output.size() == 1 );
    CHECK( r.st.output[ 0 ] == std::to_string( f ) );
}

TEST_CASE( "freeze/thaw round trip preserves handle and static type" )
{
    ir_module m = harness::load_text( R"(
fn @main() -> i32 {
entry:
  %p = alloca i32
  %x = call aval @a_sym.i32.term()
  call void @a_freeze.i32(ptr %p, aval %x)
  %y = call aval @a_thaw.i32(ptr %p)
  ret i32 0
}
)" );
    vm w( m, &reg() );
    machine_state st = w.initial_state();
    abstract_value frozen_x{}, thawed_y{};
    w.on_step = [ & ]( const machine_state &, const frame &f, const instruction &in )
    {
        if ( in.op == opcode::ret )
        {
            frozen_x = f.regs[ 1 ]; // %x is the second register (after %p)
            thawed_y = f.regs[ 2 ];
        }
    };
    auto ev = w.resume( st );
    REQUIRE( ev.k == vm_event::kind::exited );
    REQUIRE( frozen_x.is_abstract() );
    REQUIRE( thawed_y.is_abstract() );
    CHECK( frozen_x.payload == thawed_y.payload );
    CHECK( frozen_x.static_type == thawed_y.static_type );
    // the placeholder bytes under the entry are zero
    REQUIRE( st.shadow.size() == 1 );
}

TEST_CASE( "freeze of a concrete value clears the shadow entry" )
{
    ir_module m = harness::load_text( R"(
fn @main() -> i32 {
entry:
  %p = alloca i8
  %x = call aval @a_sym.i8.term()
  call void @a_freeze.i8(ptr %p, aval %x)
  %seven = call aval @a_lift.i8(i8 7)
  call void @a_freeze.i8(ptr %p, aval %seven)
  %v = load i8, %p
  %vw = zext i8 %v to i32
  ret i32 %vw
}
)" );
    vm w( m, &reg() );
    machine_state st = w.initial_state();
    auto ev = w.resume( st );
    REQUIRE( ev.k == vm_event::kind::exited );
    CHECK( ev.exit_code == 7 );
    CHECK( st.shadow.empty() );
}

TEST_CASE( "a concrete store overlapping half a frozen i32 invalidates the whole entry" )
{
    ir_module m = harness::load_text( R"(
fn @main() -> i32 {
entry:
  %p = alloca i32
  %x = call aval @a_sym.i32.term()
  call void @a_freeze.i32(ptr %p, aval %x)
  %q = ptradd %p, 2
  store i16 7, %q
  %v = load i32, %p
  ret i32 %v
}
)" );
    vm w( m, &reg() );
    machine_state st = w.initial_state();
    auto ev = w.resume( st );
    REQUIRE( ev.k == vm_event::kind::exited );
    // placeholder zeros + 0x0007 at offset 2, little endian
    CHECK( ev.exit_code == 0x00070000u );
    CHECK( st.shadow.empty() );
}

TEST_CASE( "thaw with a different static type traps" )
{
    ir_module m = harness::load_text( R"(
fn @main() -> i32 {
entry:
  %p = alloca i32
  %x = call aval @a_sym.i32.term()
  call void @a_freeze.i32(ptr %p, aval %x)
  %y = call aval @a_thaw.i16(ptr %p)
  ret i32 0
}
)" );
    vm w( m, &reg() );
    machine_state st = w.initial_state();
    auto ev = w.resume( st );
    REQUIRE( ev.k == vm_event::kind::trapped );
    CHECK( ( ev.trap == trap_kind::shadow_type_mismatch ||
             ev.trap == trap_kind::shadow_partial_access ) );
}

TEST_CASE( "thaw without an entry returns concrete bytes" )
{
    ir_module m = harness::load_text( R"(
fn @main() -> i32 {
entry:
  %p = alloca i8
  store i8 33, %p
  %y = call aval @a_thaw.i8(ptr %p)
  %v = call i8 @a_lower.i8.term(aval %y)
  %vw = zext i8 %v to i32
  ret i32 %vw
}
)" );
    vm w( m, &reg() );
    machine_state st = w.initial_state();
    auto ev = w.resume( st );
    REQUIRE( ev.k == vm_event::kind::exited );
    CHECK( ev.exit_code == 33 );
}

TEST_CASE( "plain concrete load from frozen memory traps rather than mixing bytes" )
{
    ir_module m = harness::load_text( R"(
fn @main() -> i32 {
entry:
  %p = alloca i32
  %x = call aval @a_sym.i32.term()
  call void @a_freeze.i32(ptr %p, aval %x)
  %v = load i32, %p
  ret i32 %v
}
)" );
    vm w( m, &reg() );
    machine_state st = w.initial_state();
    auto ev = w.resume( st );
    REQUIRE( ev.k == vm_event::kind::trapped );
    CHECK( ev.trap == trap_kind::shadow_partial_access );
}

TEST_CASE( "shadow/primary coherence: placeholder bytes under every entry" )
{
    ir_module m = harness::load( harness::corpus_dir() + "/store_load_sym.sir" );
    auto tr = transform( m, "term", &reg() );
    REQUIRE( tr.ok() );
    vm w( *tr.module, &reg() );
    w.on_step = [ & ]( const machine_state &st, const frame &, const instruction & )
    {
        for ( auto &[ key, e ] : st.shadow )
            for ( uint32_t i = 0; i < e.size; ++i )
                REQUIRE( st.segments[ key.first ].bytes[ key.second + i ] == 0 );
    };
    machine_state st = w.initial_state();
    for ( ;; )
    {
        vm_event ev = w.resume( st );
        if ( ev.k == vm_event::kind::exited || ev.k == vm_event::kind::trapped )
            break;
        if ( ev.k == vm_event::kind::abstract_assert )
            continue;
        if ( ev.k == vm_event::kind::assume_recorded )
            continue;
        REQUIRE( false );
    }
}

TEST_CASE( "determinism: a fixed trail reproduces identical outcomes" )
{
    ir_module m = harness::load( harness::corpus_dir() + "/choose_three.sir" );
    for ( uint32_t d = 0; d < 3; ++d )
    {
        vm w1( m, &reg() ), w2( m, &reg() );
        auto r1 = run_to_end( w1, { d } );
        auto r2 = run_to_end( w2, { d } );
        CHECK( r1.kind == r2.kind );
        CHECK( r1.exit_code == r2.exit_code );
        CHECK( r1.st.output == r2.st.output );
        CHECK( r1.st.trail == r2.st.trail );
    }
}

TEST_CASE( "invalid oracle direction traps" )
{
    ir_module m = harness::load( harness::corpus_dir() + "/choose_three.sir" );
    vm w( m, &reg() );
    machine_state st = w.initial_state();
    auto ev = w.resume( st );
    REQUIRE( ev.k == vm_event::kind::need_choice );
    auto trap_ev = w.provide_choice( st, 3 );
    REQUIRE( trap_ev );
    CHECK( trap_ev->trap == trap_kind::invalid_choice );
}

TEST_CASE( "snapshot/restore is observationally transparent" )
{
    ir_module m = harness::load( harness::corpus_dir() + "/loop_sym_bound.sir" );
    auto tr = transform( m, "term", &reg() );
    REQUIRE( tr.ok() );

    // run 5 iterations, snapshotting at every choice
    vm w( *tr.module, &reg() );
    machine_state st = w.initial_state();
    std::vector< state_image > images;
    for ( int k = 0; k < 5; ++k )
    {
        vm_event ev = w.resume( st );
        REQUIRE( ev.k == vm_event::kind::need_choice );
        images.push_back( snapshot( w, st ) );
        REQUIRE( !w.provide_choice( st, 1 ) );
        ev = w.resume( st );
        REQUIRE( ev.k == vm_event::kind::assume_recorded );
    }
    // PC length matches the iteration count at snapshot k
    for ( int k = 0; k < 5; ++k )
    {
        machine_state restored = restore( w, images[ k ] );
        CHECK( restored.pc.entries.size() == size_t( k ) );
    }

    // restore the 3rd image and continue to the exit both ways
    auto drive = [ & ]( vm &worker, machine_state s ) -> std::vector< std::string >
    {
        size_t assumed = 0;
        for ( ;; )
        {
            vm_event ev = worker.resume( s );
            if ( ev.k == vm_event::kind::need_choice )
            {
                REQUIRE( !worker.provide_choice( s, 0 ) );
                continue;
            }
            if ( ev.k == vm_event::kind::assume_recorded )
            {
                ++assumed;
                continue;
            }
            REQUIRE( ev.k == vm_event::kind::exited );
            return s.output;
        }
    };
    machine_state a = restore( w, images[ 3 ] );
    auto out_same_worker = drive( w, std::move( a ) );

    // cross-worker restore: a fresh VM with an empty arena
    vm w2( *tr.module, &reg() );
    machine_state b = restore( w2, images[ 3 ] );
    CHECK( b.pc.entries.size() == 3 );
    auto out_other_worker = drive( w2, std::move( b ) );
    CHECK( out_same_worker == out_other_worker );
}

TEST_CASE( "choice sites name the origin function and block" )
{
    ir_module m = harness::load( harness::corpus_dir() + "/choose_three.sir" );
    vm w( m, &reg() );
    machine_state st = w.initial_state();
    auto ev = w.resume( st );
    REQUIRE( ev.k == vm_event::kind::need_choice );
    CHECK( ev.site == "main:entry:c0" );
    REQUIRE( !w.provide_choice( st, 1 ) );
    REQUIRE( st.trail.size() == 1 );
    CHECK( st.trail[ 0 ].site == "main:entry:c0" );
    CHECK( st.trail[ 0 ].arity == 3 );
}
