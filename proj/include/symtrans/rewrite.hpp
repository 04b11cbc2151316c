#pragma once

#include <optional>
#include <sstream>

#include "domain.hpp"
#include "parse.hpp"
#include "print.hpp"
#include "taint.hpp"
#include "validate.hpp"

namespace symtrans
{

struct transform_result
{
    std::optional< ir_module > module;
    diagnostics errors;
    taint_map taints;
    std::string text; // canonical text of the transformed module

    bool ok() const { return module.has_value() && errors.empty(); }
};

namespace detail
{

/*
 * Phase 1 + 2 fused: abstract instructions are emitted directly as calls to
 * a_<op>.<width>.<domain>; the realization behind those names is the domain
 * library the VM dispatches into. The rewriter emits canonical text and
 * reparses it, so the output is validated by construction and every CLI
 * surface sees the same bytes.
 */
struct rewriter
{
    const ir_module &mod;
    const taint_map &tm;
    std::string domain;
    const domain_registry *registry;
    diagnostics errors;

    int fresh_counter = 0;

    rewriter( const ir_module &m, const taint_map &t, std::string dom,
              const domain_registry *reg )
        : mod( m ), tm( t ), domain( std::move( dom ) ), registry( reg )
    {
    }

    static std::string type_text( vtype t )
    {
        if ( t.is_ptr() )
            return "ptr";
        if ( t.is_aval() )
            return "aval";
        return "i" + std::to_string( t.bits );
    }

    static std::string width_text( int w ) { return "i" + std::to_string( w ); }

    std::string fresh( const function &fn, const char *base )
    {
        for ( ;; )
        {
            std::string name = std::string( base ) + std::to_string( fresh_counter++ );
            bool clash = false;
            for ( auto &r : fn.reg_names )
                clash |= r == name;
            if ( !clash )
                return name;
        }
    }

    void check_supported( opcode op, icmp_pred pred, int width, uint32_t line )
    {
        if ( !registry )
            return;
        auto *d = registry->find( domain );
        if ( !d )
        {
            errors.push_back( { 0, 0, "unknown domain '" + domain + "'" } );
            return;
        }
        if ( !d->supports( op, pred, width ) )
            errors.push_back( { line, 0,
                                "unsupported opcode in abstract position: " +
                                    std::string( opcode_name( op ) ) + " at i" +
                                    std::to_string( width ) + " in domain " + domain } );
    }

    struct fn_emit
    {
        std::vector< std::vector< std::string > > block_lines;
        std::vector< std::vector< std::string > > tail_lines; // before terminator
    };

    static std::string operand_text( const function &fn, const operand &o )
    {
        if ( o.is_reg() )
            return "%" + fn.reg_names[ o.reg ];
        return std::to_string( o.imm );
    }

    std::string verbatim( const function &fn, const instruction &in )
    {
        std::ostringstream os;
        print_instruction( os, fn, in );
        return os.str();
    }

    void emit_function( std::ostream &os, uint32_t fi, uint8_t var )
    {
        const function &fn = mod.functions[ fi ];
        const variant_state &vs = tm.variants[ fi ][ var ];
        bool is_main = fn.name == "main" && var == 0;

        auto tainted_reg = [ & ]( uint32_t r ) { return vs.mab[ r ] != 0; };
        auto tainted_op = [ & ]( const operand &o ) { return o.is_reg() && tainted_reg( o.reg ); };

        fn_emit em;
        em.block_lines.resize( fn.blocks.size() );
        em.tail_lines.resize( fn.blocks.size() );

        // an operand in abstract position: lift if it is still concrete
        auto aval_operand = [ & ]( std::vector< std::string > &lines, const operand &o ) -> std::string
        {
            if ( tainted_op( o ) )
                return "aval " + operand_text( fn, o );
            std::string name = fresh( fn, "lift" );
            lines.push_back( "%" + name + " = call aval @a_lift." +
                             type_text( o.type ) + "(" + type_text( o.type ) + " " +
                             operand_text( fn, o ) + ")" );
            return "aval %" + name;
        };

        auto lower_operand = [ & ]( std::vector< std::string > &lines, const operand &o,
                                    int width ) -> std::string
        {
            std::string name = fresh( fn, "low" );
            lines.push_back( "%" + name + " = call " + width_text( width ) + " @a_lower." +
                             width_text( width ) + "." + domain + "(aval " +
                             operand_text( fn, o ) + ")" );
            return "%" + name;
        };

        // plan phi edge lifts first: they land in predecessor blocks
        std::map< std::pair< uint32_t, uint32_t >, std::vector< std::string > > phi_operand_text;
        for ( uint32_t b = 0; b < fn.blocks.size(); ++b )
            for ( uint32_t i = 0; i < fn.blocks[ b ].insts.size(); ++i )
            {
                const instruction &in = fn.blocks[ b ].insts[ i ];
                if ( in.op != opcode::phi || !tainted_reg( in.result ) )
                    continue;
                std::vector< std::string > texts;
                for ( auto &pi : in.incoming )
                {
                    if ( tainted_op( pi.value ) )
                        texts.push_back( operand_text( fn, pi.value ) );
                    else
                    {
                        std::string name = fresh( fn, "lift" );
                        em.tail_lines[ pi.block ].push_back(
                            "%" + name + " = call aval @a_lift." + type_text( pi.value.type ) +
                            "(" + type_text( pi.value.type ) + " " +
                            operand_text( fn, pi.value ) + ")" );
                        texts.push_back( "%" + name );
                    }
                }
                phi_operand_text[ { b, i } ] = std::move( texts );
            }

        for ( uint32_t b = 0; b < fn.blocks.size(); ++b )
        {
            auto &lines = em.block_lines[ b ];
            for ( uint32_t ii = 0; ii < fn.blocks[ b ].insts.size(); ++ii )
            {
                const instruction &in = fn.blocks[ b ].insts[ ii ];
                bool res_tainted = in.result != no_reg && tainted_reg( in.result );

                if ( is_binop( in.op ) && res_tainted )
                {
                    int w = in.args[ 0 ].type.bits;
                    check_supported( in.op, icmp_pred::eq, w, in.line );
                    std::string a = aval_operand( lines, in.args[ 0 ] );
                    std::string bx = aval_operand( lines, in.args[ 1 ] );
                    lines.push_back( "%" + fn.reg_names[ in.result ] + " = call aval @a_" +
                                     std::string( opcode_name( in.op ) ) + "." + width_text( w ) +
                                     "." + domain + "(" + a + ", " + bx + ")" );
                    continue;
                }
                if ( in.op == opcode::icmp && res_tainted )
                {
                    int w = in.args[ 0 ].type.bits;
                    check_supported( opcode::icmp, in.pred, w, in.line );
                    std::string a = aval_operand( lines, in.args[ 0 ] );
                    std::string bx = aval_operand( lines, in.args[ 1 ] );
                    lines.push_back( "%" + fn.reg_names[ in.result ] + " = call aval @a_icmp." +
                                     std::string( pred_name( in.pred ) ) + "." + width_text( w ) +
                                     "." + domain + "(" + a + ", " + bx + ")" );
                    continue;
                }
                if ( is_cast( in.op ) && res_tainted )
                {
                    int wf = in.args[ 0 ].type.bits, wt = in.cast_to.bits;
                    check_supported( in.op, icmp_pred::eq, wf, in.line );
                    std::string a = aval_operand( lines, in.args[ 0 ] );
                    lines.push_back( "%" + fn.reg_names[ in.result ] + " = call aval @a_" +
                                     std::string( opcode_name( in.op ) ) + "." + width_text( wf ) +
                                     "." + width_text( wt ) + "." + domain + "(" + a + ")" );
                    continue;
                }
                if ( in.op == opcode::load && res_tainted )
                {
                    lines.push_back( "%" + fn.reg_names[ in.result ] + " = call aval @a_thaw." +
                                     width_text( in.result_type.bits ) + "(ptr " +
                                     operand_text( fn, in.args[ 0 ] ) + ")" );
                    continue;
                }
                if ( in.op == opcode::store && tainted_op( in.args[ 0 ] ) )
                {
                    lines.push_back( "call void @a_freeze." +
                                     width_text( in.args[ 0 ].type.bits ) + "(ptr " +
                                     operand_text( fn, in.args[ 1 ] ) + ", aval " +
                                     operand_text( fn, in.args[ 0 ] ) + ")" );
                    continue;
                }
                if ( in.op == opcode::br && in.is_cond_br() && tainted_op( in.args[ 0 ] ) )
                {
                    // nondeterministic choice; the single assume takes the
                    // chosen direction, so one assume executes per edge
                    std::string dir = fresh( fn, "dir" );
                    std::string dirb = fresh( fn, "dirb" );
                    lines.push_back( "%" + dir + " = call i32 @choose(i32 2)" );
                    lines.push_back( "call void @a_assume." + domain + "(aval " +
                                     operand_text( fn, in.args[ 0 ] ) + ", i32 %" + dir + ")" );
                    lines.push_back( "%" + dirb + " = trunc i32 %" + dir + " to i1" );
                    lines.push_back( "br %" + dirb + ", " + fn.blocks[ in.target ].label + ", " +
                                     fn.blocks[ in.target_false ].label );
                    continue;
                }
                if ( in.op == opcode::phi && res_tainted )
                {
                    const auto &texts = phi_operand_text.at( { b, ii } );
                    std::string line = "%" + fn.reg_names[ in.result ] + " = phi aval ";
                    for ( size_t k = 0; k < in.incoming.size(); ++k )
                    {
                        if ( k )
                            line += ", ";
                        line += "[ " + texts[ k ] + ", " + fn.blocks[ in.incoming[ k ].block ].label +
                                " ]";
                    }
                    lines.push_back( line );
                    continue;
                }
                if ( in.op == opcode::ret && !in.args.empty() )
                {
                    bool fn_ret_tainted = !is_main && vs.ret_mab;
                    if ( is_main && tainted_op( in.args[ 0 ] ) )
                    {
                        std::string low = lower_operand( lines, in.args[ 0 ], 32 );
                        lines.push_back( "ret i32 " + low );
                        continue;
                    }
                    if ( fn_ret_tainted )
                    {
                        std::string a = aval_operand( lines, in.args[ 0 ] );
                        lines.push_back( "ret " + a );
                        continue;
                    }
                    lines.push_back( verbatim( fn, in ) );
                    continue;
                }
                if ( in.op == opcode::call )
                {
                    if ( emit_call( lines, fn, vs, in ) )
                        continue;
                    lines.push_back( verbatim( fn, in ) );
                    continue;
                }

                lines.push_back( verbatim( fn, in ) );
            }
        }

        // function header
        os << "fn @" << fn.name << ( var ? ".sym" : "" ) << "(";
        for ( uint32_t p = 0; p < fn.params.size(); ++p )
        {
            if ( p )
                os << ", ";
            os << "%" << fn.params[ p ].name << ": "
               << ( tainted_reg( p ) ? "aval" : type_text( fn.params[ p ].type ) );
        }
        os << ") -> ";
        if ( fn.returns_void )
            os << "void";
        else if ( !is_main && vs.ret_mab )
            os << "aval";
        else
            os << type_text( fn.ret_type );
        os << " {\n";
        for ( uint32_t b = 0; b < fn.blocks.size(); ++b )
        {
            os << fn.blocks[ b ].label << ":\n";
            auto &lines = em.block_lines[ b ];
            for ( size_t i = 0; i < lines.size(); ++i )
            {
                if ( i + 1 == lines.size() )
                    for ( auto &t : em.tail_lines[ b ] )
                        os << "  " << t << "\n";
                os << "  " << lines[ i ] << "\n";
            }
        }
        os << "}\n";
    }

    // returns false if the call should be emitted verbatim
    bool emit_call( std::vector< std::string > &lines, const function &fn,
                    const variant_state &vs, const instruction &in )
    {
        auto tainted_op = [ & ]( const operand &o )
        { return o.is_reg() && vs.mab[ o.reg ] != 0; };

        auto aval_operand = [ & ]( const operand &o ) -> std::string
        {
            if ( tainted_op( o ) )
                return "aval " + operand_text( fn, o );
            std::string name = fresh( fn, "lift" );
            lines.push_back( "%" + name + " = call aval @a_lift." + type_text( o.type ) + "(" +
                             type_text( o.type ) + " " + operand_text( fn, o ) + ")" );
            return "aval %" + name;
        };

        switch ( in.ci.kind )
        {
            case callee_kind::sym:
                lines.push_back( "%" + fn.reg_names[ in.result ] + " = call aval @a_sym." +
                                 width_text( in.ci.width ) + "." + domain + "()" );
                return true;

            case callee_kind::assume_:
                if ( !tainted_op( in.args[ 0 ] ) )
                    return false;
                lines.push_back( "call void @a_assume." + domain + "(aval " +
                                 operand_text( fn, in.args[ 0 ] ) + ", i32 1)" );
                return true;

            case callee_kind::assert_:
                if ( !tainted_op( in.args[ 0 ] ) )
                    return false;
                lines.push_back( "call void @a_assert." + domain + "(aval " +
                                 operand_text( fn, in.args[ 0 ] ) + ")" );
                return true;

            case callee_kind::lower:
                if ( !tainted_op( in.args[ 0 ] ) )
                    return false;
                lines.push_back( "%" + fn.reg_names[ in.result ] + " = call " +
                                 width_text( in.ci.width ) + " @a_lower." +
                                 width_text( in.ci.width ) + "." + domain + "(aval " +
                                 operand_text( fn, in.args[ 0 ] ) + ")" );
                return true;

            case callee_kind::print:
            {
                if ( !tainted_op( in.args[ 0 ] ) )
                    return false;
                std::string name = fresh( fn, "low" );
                lines.push_back( "%" + name + " = call " + width_text( in.ci.width ) +
                                 " @a_lower." + width_text( in.ci.width ) + "." + domain +
                                 "(aval " + operand_text( fn, in.args[ 0 ] ) + ")" );
                lines.push_back( "call void @print." + width_text( in.ci.width ) + "(" +
                                 width_text( in.ci.width ) + " %" + name + ")" );
                return true;
            }

            case callee_kind::user:
                break;

            default:
                return false; // choose and a_* calls stay as written
        }

        // user call: pick the variant, lift concrete args bound to tainted params
        uint32_t ti = ~0u;
        for ( uint32_t i = 0; i < mod.functions.size(); ++i )
            if ( mod.functions[ i ].name == in.callee )
                ti = i;
        if ( ti == ~0u )
            return false;

        bool any_tainted = false;
        for ( auto &o : in.args )
            any_tainted |= tainted_op( o );

        const variant_state &target = tm.variants[ ti ][ any_tainted ? 1 : 0 ];
        const function &callee = mod.functions[ ti ];
        bool ret_tainted = !callee.returns_void && target.ret_mab &&
                           !( callee.name == "main" );

        if ( !any_tainted && !ret_tainted )
            return false; // fully concrete call site, original callee

        std::string args;
        for ( size_t p = 0; p < in.args.size(); ++p )
        {
            if ( p )
                args += ", ";
            bool param_tainted = target.mab[ p ] != 0;
            if ( param_tainted )
                args += aval_operand( in.args[ p ] );
            else
                args += type_text( in.args[ p ].type ) + " " + operand_text( fn, in.args[ p ] );
        }

        std::string callee_name = in.callee + ( any_tainted ? ".sym" : "" );
        std::string ret_text = callee.returns_void
                                   ? "void"
                                   : ( ret_tainted ? "aval" : type_text( callee.ret_type ) );
        std::string line;
        if ( in.result != no_reg )
            line = "%" + fn.reg_names[ in.result ] + " = ";
        line += "call " + ret_text + " @" + callee_name + "(" + args + ")";
        lines.push_back( line );
        return true;
    }

    std::string emit_module()
    {
        std::ostringstream os;
        bool first = true;
        for ( uint32_t fi = 0; fi < mod.functions.size(); ++fi )
        {
            if ( !first )
                os << "\n";
            first = false;
            emit_function( os, fi, 0 );
            if ( tm.variants[ fi ][ 1 ].used )
            {
                os << "\n";
                emit_function( os, fi, 1 );
            }
        }
        return os.str();
    }
};

} // namespace detail

inline transform_result rewrite( const ir_module &m, const taint_map &tm,
                                 const std::string &domain,
                                 const domain_registry *registry = nullptr )
{
    transform_result res;
    res.taints = tm;

    for ( auto &fn : m.functions )
        if ( fn.name.size() > 4 && fn.name.substr( fn.name.size() - 4 ) == ".sym" )
            for ( uint32_t fi = 0; fi < m.functions.size(); ++fi )
                if ( m.functions[ fi ].name + ".sym" == fn.name &&
                     tm.variants[ fi ][ 1 ].used )
                    res.errors.push_back(
                        { 0, 0, "clone name @" + fn.name + " already taken" } );

    detail::rewriter rw( m, tm, domain, registry );
    std::string text = rw.emit_module();
    res.errors.insert( res.errors.end(), rw.errors.begin(), rw.errors.end() );
    if ( !res.errors.empty() )
        return res;

    parse_result pr = parse_module( text );
    if ( !pr.ok() )
    {
        res.errors.push_back( { 0, 0, "internal: transformed module does not parse" } );
        for ( auto &e : pr.errors )
            res.errors.push_back( e );
        res.text = text;
        return res;
    }
    diagnostics vd = validate( *pr.module );
    if ( !vd.empty() )
    {
        res.errors.push_back( { 0, 0, "internal: transformed module does not validate" } );
        res.errors.insert( res.errors.end(), vd.begin(), vd.end() );
        res.text = text;
        return res;
    }
    res.module = std::move( pr.module );
    res.text = std::move( text );
    return res;
}

// validate -> propagate_values -> rewrite -> validate
inline transform_result transform( const ir_module &m, const std::string &domain,
                                   const domain_registry *registry = nullptr )
{
    transform_result res;
    ir_module copy = m;
    diagnostics vd = validate( copy );
    if ( !vd.empty() )
    {
        res.errors = std::move( vd );
        return res;
    }
    taint_map tm = propagate_values( copy );
    if ( !tm.errors.empty() )
    {
        res.errors = tm.errors;
        res.taints = std::move( tm );
        return res;
    }
    return rewrite( copy, tm, domain, registry );
}

} // namespace symtrans
