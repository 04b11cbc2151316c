#pragma once

#include <array>
#include <set>

#include "diag.hpp"
#include "ir.hpp"

namespace symtrans
{

/*
 * Value propagation: the least fixpoint that pushes abstractness from
 * @sym seeds along the data flow, through memory (alloca sites weakened to
 * may-hold-abstract) and across calls (context-insensitive; a function with
 * any abstract-tainted call site gets one clone shared by all such sites,
 * the original is kept for fully concrete sites).
 *
 * Per register we track two accumulating facts: may-hold-abstract and
 * may-hold-concrete. Their combination classifies the register as
 * concrete, abstract, or the toplevel sum.
 */

enum class taint : uint8_t { concrete, abstract, sum };

struct ptset
{
    bool top = false;
    std::set< uint32_t > sites;

    bool merge( const ptset &o )
    {
        bool changed = false;
        if ( o.top && !top )
        {
            top = true;
            changed = true;
        }
        for ( uint32_t s : o.sites )
            changed |= sites.insert( s ).second;
        return changed;
    }

    bool add( uint32_t s ) { return sites.insert( s ).second; }
    bool empty() const { return !top && sites.empty(); }
};

struct variant_state
{
    bool used = false;
    std::vector< uint8_t > mab, mcc; // may-abstract / may-concrete per register
    std::vector< ptset > pts;
    uint8_t ret_mab = 0, ret_mcc = 0;
    ptset ret_pts;
};

struct alloca_site
{
    uint32_t fn = 0;
    uint8_t variant = 0;
    uint32_t block = 0, inst = 0;
    bool may_abs = false;
};

struct taint_map
{
    // [function][0 = original, 1 = clone-for-tainted-sites]
    std::vector< std::array< variant_state, 2 > > variants;
    std::vector< alloca_site > sites;
    diagnostics errors;

    taint classify( uint32_t fn, uint8_t var, uint32_t reg ) const
    {
        const variant_state &v = variants[ fn ][ var ];
        if ( v.mab[ reg ] )
            return v.mcc[ reg ] ? taint::sum : taint::abstract;
        return taint::concrete;
    }

    bool tainted( uint32_t fn, uint8_t var, uint32_t reg ) const
    {
        return variants[ fn ][ var ].mab[ reg ];
    }

    uint32_t site_index( uint32_t fn, uint8_t var, uint32_t block, uint32_t inst ) const
    {
        for ( uint32_t i = 0; i < sites.size(); ++i )
        {
            const alloca_site &s = sites[ i ];
            if ( s.fn == fn && s.variant == var && s.block == block && s.inst == inst )
                return i;
        }
        return ~0u;
    }
};

namespace detail
{

struct propagator
{
    const ir_module &mod;
    taint_map tm;
    bool changed = false;

    explicit propagator( const ir_module &m ) : mod( m )
    {
        tm.variants.resize( mod.functions.size() );
        for ( uint32_t fi = 0; fi < mod.functions.size(); ++fi )
        {
            const function &fn = mod.functions[ fi ];
            for ( uint8_t var = 0; var < 2; ++var )
            {
                variant_state &v = tm.variants[ fi ][ var ];
                v.mab.assign( fn.reg_names.size(), 0 );
                v.mcc.assign( fn.reg_names.size(), 0 );
                v.pts.assign( fn.reg_names.size(), {} );
                for ( uint32_t b = 0; b < fn.blocks.size(); ++b )
                    for ( uint32_t i = 0; i < fn.blocks[ b ].insts.size(); ++i )
                        if ( fn.blocks[ b ].insts[ i ].op == opcode::alloca_ )
                            tm.sites.push_back( { fi, var, b, i, false } );
            }
            tm.variants[ fi ][ 0 ].used = true;
            // original variants: parameters are concrete
            for ( uint32_t p = 0; p < fn.params.size(); ++p )
                tm.variants[ fi ][ 0 ].mcc[ p ] = 1;
        }
    }

    uint32_t fn_index( std::string_view name ) const
    {
        for ( uint32_t i = 0; i < mod.functions.size(); ++i )
            if ( mod.functions[ i ].name == name )
                return i;
        return ~0u;
    }

    void raise_ab( variant_state &v, uint32_t r )
    {
        if ( !v.mab[ r ] )
        {
            v.mab[ r ] = 1;
            changed = true;
        }
    }
    void raise_cc( variant_state &v, uint32_t r )
    {
        if ( !v.mcc[ r ] )
        {
            v.mcc[ r ] = 1;
            changed = true;
        }
    }

    struct fact
    {
        uint8_t mab = 0, mcc = 0;
        ptset pts;
    };

    fact of_operand( const variant_state &v, const operand &o ) const
    {
        if ( !o.is_reg() )
            return { 0, 1, {} };
        return { v.mab[ o.reg ], v.mcc[ o.reg ], v.pts[ o.reg ] };
    }

    void set_result( variant_state &v, uint32_t r, const fact &f )
    {
        if ( f.mab )
            raise_ab( v, r );
        if ( f.mcc )
            raise_cc( v, r );
        if ( v.pts[ r ].merge( f.pts ) )
            changed = true;
    }

    void mark_sites_abstract( const ptset &p )
    {
        auto mark = [ & ]( alloca_site &s )
        {
            if ( !s.may_abs )
            {
                s.may_abs = true;
                changed = true;
            }
        };
        if ( p.top )
        {
            for ( auto &s : tm.sites )
                mark( s );
            return;
        }
        for ( uint32_t si : p.sites )
            mark( tm.sites[ si ] );
    }

    bool any_site_abstract( const ptset &p ) const
    {
        if ( p.top )
        {
            for ( auto &s : tm.sites )
                if ( s.may_abs )
                    return true;
            return false;
        }
        for ( uint32_t si : p.sites )
            if ( tm.sites[ si ].may_abs )
                return true;
        return false;
    }

    void transfer( uint32_t fi, uint8_t var )
    {
        const function &fn = mod.functions[ fi ];
        variant_state &v = tm.variants[ fi ][ var ];

        for ( uint32_t b = 0; b < fn.blocks.size(); ++b )
            for ( uint32_t i = 0; i < fn.blocks[ b ].insts.size(); ++i )
            {
                const instruction &in = fn.blocks[ b ].insts[ i ];

                if ( is_binop( in.op ) || in.op == opcode::icmp || is_cast( in.op ) )
                {
                    fact r;
                    r.mcc = 1;
                    for ( auto &o : in.args )
                    {
                        fact fo = of_operand( v, o );
                        r.mab |= fo.mab;
                        r.mcc &= fo.mcc;
                    }
                    set_result( v, in.result, r );
                    continue;
                }

                switch ( in.op )
                {
                    case opcode::alloca_:
                    {
                        fact r;
                        r.mcc = 1;
                        r.pts.add( tm.site_index( fi, var, b, i ) );
                        set_result( v, in.result, r );
                        break;
                    }
                    case opcode::ptradd:
                    {
                        fact base = of_operand( v, in.args[ 0 ] );
                        fact r;
                        r.mcc = 1;
                        r.pts = base.pts;
                        set_result( v, in.result, r );
                        break;
                    }
                    case opcode::load:
                    {
                        fact addr = of_operand( v, in.args[ 0 ] );
                        fact r;
                        r.mcc = 1;
                        if ( in.result_type.is_ptr() )
                            r.pts.top = true; // pointers loaded from memory alias anything
                        else if ( any_site_abstract( addr.pts ) )
                            r.mab = 1; // thaw: dynamic sum
                        set_result( v, in.result, r );
                        break;
                    }
                    case opcode::store:
                    {
                        fact val = of_operand( v, in.args[ 0 ] );
                        fact addr = of_operand( v, in.args[ 1 ] );
                        if ( val.mab )
                            mark_sites_abstract( addr.pts );
                        break;
                    }
                    case opcode::phi:
                    {
                        fact r;
                        for ( auto &pi : in.incoming )
                        {
                            fact fo = of_operand( v, pi.value );
                            r.mab |= fo.mab;
                            r.mcc |= fo.mcc;
                            r.pts.merge( fo.pts );
                        }
                        set_result( v, in.result, r );
                        break;
                    }
                    case opcode::ret:
                    {
                        if ( in.args.empty() )
                            break;
                        fact fo = of_operand( v, in.args[ 0 ] );
                        if ( fo.mab && !v.ret_mab )
                        {
                            v.ret_mab = 1;
                            changed = true;
                        }
                        if ( fo.mcc && !v.ret_mcc )
                        {
                            v.ret_mcc = 1;
                            changed = true;
                        }
                        if ( v.ret_pts.merge( fo.pts ) )
                            changed = true;
                        break;
                    }
                    case opcode::call:
                        transfer_call( fi, var, in );
                        break;
                    default:
                        break;
                }
            }
    }

    void transfer_call( uint32_t fi, uint8_t var, const instruction &in )
    {
        variant_state &v = tm.variants[ fi ][ var ];
        switch ( in.ci.kind )
        {
            case callee_kind::sym:
                raise_ab( v, in.result ); // the seed
                return;
            case callee_kind::choose:
            case callee_kind::lower:
            {
                fact r;
                r.mcc = 1;
                set_result( v, in.result, r );
                return;
            }
            case callee_kind::user:
                break;
            default:
                // print/assume/assert have no result; values reaching them
                // stay as-is (lowering is inserted at the use site); already
                // abstract a_* calls are left untouched by re-transformation
                if ( in.result != no_reg )
                    raise_cc( v, in.result );
                return;
        }

        uint32_t ti = fn_index( in.callee );
        if ( ti == ~0u )
            return;
        bool any_tainted = false;
        for ( auto &o : in.args )
            any_tainted |= of_operand( v, o ).mab != 0;

        uint8_t tv = any_tainted ? 1 : 0;
        variant_state &target = tm.variants[ ti ][ tv ];
        if ( !target.used )
        {
            target.used = true;
            changed = true;
        }
        for ( size_t p = 0; p < in.args.size(); ++p )
        {
            fact fo = of_operand( v, in.args[ p ] );
            if ( fo.mab )
                raise_ab( target, uint32_t( p ) );
            if ( fo.mcc )
                raise_cc( target, uint32_t( p ) );
            if ( target.pts[ p ].merge( fo.pts ) )
                changed = true;
        }
        if ( in.result != no_reg )
        {
            fact r{ target.ret_mab, target.ret_mcc, target.ret_pts };
            set_result( v, in.result, r );
        }
    }

    void check_errors()
    {
        for ( uint32_t fi = 0; fi < mod.functions.size(); ++fi )
            for ( uint8_t var = 0; var < 2; ++var )
            {
                variant_state &v = tm.variants[ fi ][ var ];
                if ( !v.used )
                    continue;
                const function &fn = mod.functions[ fi ];
                for ( auto &bb : fn.blocks )
                    for ( auto &in : bb.insts )
                    {
                        auto tainted_arg = [ & ]( const operand &o )
                        { return o.is_reg() && v.mab[ o.reg ]; };
                        if ( in.op == opcode::ptradd && tainted_arg( in.args[ 1 ] ) )
                            tm.errors.push_back(
                                { in.line, 0,
                                  "@" + fn.name + ": abstract value used in pointer arithmetic" } );
                        if ( in.op == opcode::call && in.ci.kind == callee_kind::choose &&
                             tainted_arg( in.args[ 0 ] ) )
                            tm.errors.push_back(
                                { in.line, 0, "@" + fn.name + ": abstract @choose arity" } );
                    }
            }
    }

    taint_map run()
    {
        do
        {
            changed = false;
            for ( uint32_t fi = 0; fi < mod.functions.size(); ++fi )
                for ( uint8_t var = 0; var < 2; ++var )
                    if ( tm.variants[ fi ][ var ].used )
                        transfer( fi, var );
        } while ( changed );
        check_errors();
        return std::move( tm );
    }
};

} // namespace detail

// the module must be validated (call targets resolved)
inline taint_map propagate_values( const ir_module &m )
{
    return detail::propagator( m ).run();
}

} // namespace symtrans
