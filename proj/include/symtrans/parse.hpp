#pragma once

#include <charconv>
#include <optional>
#include <unordered_map>

#include "diag.hpp"
#include "ir.hpp"

namespace symtrans
{

/*
 * Recursive-descent parser for the textual mini-IR. The grammar is the
 * interchange format of all CLI commands:
 *
 *   fn @name(%p: i32, ...) -> i32 {
 *   entry:
 *     %r = add i32 %a, %b       ; comment
 *     br %r1, then, else
 *     ret i32 0
 *   }
 *
 * One instruction per line, comments run from ';' to end of line, integer
 * literals are decimal or 0x hex, block references are bare labels.
 */

struct parse_result
{
    std::optional< ir_module > module;
    diagnostics errors;

    bool ok() const { return module.has_value() && errors.empty(); }
};

namespace detail
{

struct lexer
{
    std::string_view src;
    size_t pos = 0;
    uint32_t line = 1, col = 1;

    struct token
    {
        enum class k
        {
            ident, reg, global, number, punct, eol, eof
        };
        k kind;
        std::string_view text;
        uint64_t value = 0;   // number
        bool negative = false;
        uint32_t line = 0, col = 0;
    };

    token cur;

    explicit lexer( std::string_view s ) : src( s ) { advance(); }

    void bump( size_t n = 1 )
    {
        for ( size_t i = 0; i < n && pos < src.size(); ++i )
        {
            if ( src[ pos ] == '\n' )
            {
                ++line;
                col = 1;
            }
            else
                ++col;
            ++pos;
        }
    }

    static bool ident_start( char c )
    {
        return ( c >= 'a' && c <= 'z' ) || ( c >= 'A' && c <= 'Z' ) || c == '_';
    }
    static bool ident_char( char c )
    {
        return ident_start( c ) || ( c >= '0' && c <= '9' ) || c == '.';
    }

    void advance()
    {
        // skip spaces and comments (newlines are significant)
        while ( pos < src.size() )
        {
            char c = src[ pos ];
            if ( c == ' ' || c == '\t' || c == '\r' )
                bump();
            else if ( c == ';' )
            {
                while ( pos < src.size() && src[ pos ] != '\n' )
                    bump();
            }
            else
                break;
        }

        cur.line = line;
        cur.col = col;

        if ( pos >= src.size() )
        {
            cur.kind = token::k::eof;
            cur.text = "";
            return;
        }

        char c = src[ pos ];
        if ( c == '\n' )
        {
            cur.kind = token::k::eol;
            cur.text = "\n";
            bump();
            return;
        }

        if ( c == '%' || c == '@' )
        {
            size_t start = pos + 1;
            bump();
            while ( pos < src.size() && ident_char( src[ pos ] ) )
                bump();
            cur.kind = c == '%' ? token::k::reg : token::k::global;
            cur.text = src.substr( start, pos - start );
            return;
        }

        if ( ident_start( c ) )
        {
            size_t start = pos;
            while ( pos < src.size() && ident_char( src[ pos ] ) )
                bump();
            cur.kind = token::k::ident;
            cur.text = src.substr( start, pos - start );
            return;
        }

        bool neg_number = c == '-' && pos + 1 < src.size() &&
                          src[ pos + 1 ] >= '0' && src[ pos + 1 ] <= '9';
        if ( ( c >= '0' && c <= '9' ) || neg_number )
        {
            size_t start = pos;
            bool neg = c == '-';
            bump();
            bool hex = false;
            if ( !neg && c == '0' && pos < src.size() && ( src[ pos ] == 'x' || src[ pos ] == 'X' ) )
            {
                hex = true;
                bump();
            }
            size_t digits = pos;
            while ( pos < src.size() &&
                    ( ( src[ pos ] >= '0' && src[ pos ] <= '9' ) ||
                      ( hex && ( ( src[ pos ] >= 'a' && src[ pos ] <= 'f' ) ||
                                 ( src[ pos ] >= 'A' && src[ pos ] <= 'F' ) ) ) ) )
                bump();
            cur.kind = token::k::number;
            cur.text = src.substr( start, pos - start );
            cur.negative = neg;
            std::string_view body = hex ? src.substr( digits, pos - digits )
                                        : src.substr( start + ( neg ? 1 : 0 ), pos - start - ( neg ? 1 : 0 ) );
            uint64_t v = 0;
            std::from_chars( body.data(), body.data() + body.size(), v, hex ? 16 : 10 );
            cur.value = neg ? ~v + 1 : v;
            return;
        }

        cur.kind = token::k::punct;
        cur.text = src.substr( pos, 1 );
        bump();
    }
};

struct parser
{
    lexer lex;
    diagnostics errs;
    ir_module mod;

    using tk = lexer::token::k;

    explicit parser( std::string_view src ) : lex( src ) {}

    [[noreturn]] void fail( const std::string &msg )
    {
        errs.push_back( { lex.cur.line, lex.cur.col, msg } );
        throw errs.back();
    }

    void skip_eol()
    {
        while ( lex.cur.kind == tk::eol )
            lex.advance();
    }

    bool at_punct( char c ) const
    {
        return lex.cur.kind == tk::punct && lex.cur.text[ 0 ] == c;
    }

    void expect_punct( char c )
    {
        if ( !at_punct( c ) )
            fail( std::string( "expected '" ) + c + "'" );
        lex.advance();
    }

    bool eat_punct( char c )
    {
        if ( !at_punct( c ) )
            return false;
        lex.advance();
        return true;
    }

    std::string expect_ident( const char *what )
    {
        if ( lex.cur.kind != tk::ident )
            fail( std::string( "expected " ) + what );
        std::string s( lex.cur.text );
        lex.advance();
        return s;
    }

    bool at_kw( std::string_view kw ) const
    {
        return lex.cur.kind == tk::ident && lex.cur.text == kw;
    }

    std::optional< vtype > parse_vtype_opt()
    {
        if ( lex.cur.kind != tk::ident )
            return std::nullopt;
        std::string_view t = lex.cur.text;
        if ( t == "ptr" )
        {
            lex.advance();
            return t_ptr;
        }
        if ( t == "aval" )
        {
            lex.advance();
            return t_aval;
        }
        if ( t.size() >= 2 && t[ 0 ] == 'i' )
        {
            int w = 0;
            auto [ p, ec ] = std::from_chars( t.data() + 1, t.data() + t.size(), w );
            if ( ec == std::errc{} && p == t.data() + t.size() && valid_width( w ) )
            {
                lex.advance();
                return t_int( w );
            }
        }
        return std::nullopt;
    }

    vtype parse_vtype()
    {
        auto t = parse_vtype_opt();
        if ( !t )
            fail( "expected type (i1/i8/i16/i32/i64/ptr/aval)" );
        return *t;
    }

    mem_type parse_mem_type()
    {
        if ( at_punct( '[' ) )
        {
            lex.advance();
            if ( lex.cur.kind != tk::number || lex.cur.negative )
                fail( "expected array length" );
            uint64_t n = lex.cur.value;
            lex.advance();
            if ( !at_kw( "x" ) )
                fail( "expected 'x' in array type" );
            lex.advance();
            mem_type elem = parse_mem_type();
            expect_punct( ']' );
            mem_type t;
            t.kind = mem_type::k::array;
            t.count = n;
            t.sub.push_back( std::move( elem ) );
            return t;
        }
        if ( at_punct( '{' ) )
        {
            lex.advance();
            mem_type t;
            t.kind = mem_type::k::record;
            t.sub.push_back( parse_mem_type() );
            while ( eat_punct( ',' ) )
                t.sub.push_back( parse_mem_type() );
            expect_punct( '}' );
            return t;
        }
        vtype s = parse_vtype();
        if ( s.is_aval() )
            fail( "aval cannot be stored in memory" );
        return mt_scalar( s );
    }

    // register name resolution: two passes per function, defs collected first
    struct reg_scope
    {
        std::unordered_map< std::string, uint32_t > by_name;
        function *fn = nullptr;

        uint32_t define( parser &p, const std::string &name )
        {
            auto [ it, fresh ] = by_name.try_emplace( name, uint32_t( fn->reg_names.size() ) );
            if ( !fresh )
                p.fail( "SSA violation: register %" + name + " defined more than once" );
            fn->reg_names.push_back( name );
            return it->second;
        }

        uint32_t lookup( parser &p, const std::string &name )
        {
            auto it = by_name.find( name );
            if ( it == by_name.end() )
                p.fail( "SSA violation: use of undefined register %" + name );
            return it->second;
        }
    };

    struct pending_operand
    {
        bool is_reg = false;
        std::string reg;
        uint64_t imm = 0;
        bool negative = false;
        std::string_view raw;
        uint32_t line = 0, col = 0;
    };

    pending_operand parse_operand_raw()
    {
        pending_operand o;
        o.line = lex.cur.line;
        o.col = lex.cur.col;
        if ( lex.cur.kind == tk::reg )
        {
            o.is_reg = true;
            o.reg = std::string( lex.cur.text );
            lex.advance();
            return o;
        }
        if ( lex.cur.kind == tk::number )
        {
            o.imm = lex.cur.value;
            o.negative = lex.cur.negative;
            o.raw = lex.cur.text;
            lex.advance();
            return o;
        }
        fail( "expected operand (register or integer literal)" );
    }

    void check_literal_fits( const pending_operand &o, vtype t )
    {
        if ( !t.is_int() )
            return;
        uint64_t m = bits_mask( t.bits );
        if ( o.negative )
        {
            // value already two's-complement negated; accept if it sign-extends back
            int64_t sv = int64_t( o.imm );
            if ( t.bits < 64 && ( sv < -int64_t( 1ull << ( t.bits - 1 ) ) ) )
                errs.push_back( { o.line, o.col, "literal does not fit i" + std::to_string( t.bits ) } );
        }
        else if ( t.bits < 64 && o.imm > m )
            errs.push_back( { o.line, o.col, "literal does not fit i" + std::to_string( t.bits ) } );
    }

    static uint64_t bits_mask( int w ) { return w >= 64 ? ~0ull : ( 1ull << w ) - 1; }

    operand finish_operand( reg_scope &rs, const pending_operand &o, vtype t )
    {
        if ( o.is_reg )
            return operand::make_reg( rs.lookup( *this, o.reg ), t );
        check_literal_fits( o, t );
        return operand::make_imm( o.imm & ( t.is_int() ? bits_mask( t.bits ) : ~0ull ), t );
    }

    // --- instruction parsing -------------------------------------------

    static std::optional< opcode > binop_from_name( std::string_view n )
    {
        static const std::pair< std::string_view, opcode > table[] = {
            { "add", opcode::add },   { "sub", opcode::sub },   { "mul", opcode::mul },
            { "udiv", opcode::udiv }, { "sdiv", opcode::sdiv }, { "urem", opcode::urem },
            { "srem", opcode::srem }, { "and", opcode::band },  { "or", opcode::bor },
            { "xor", opcode::bxor },  { "shl", opcode::shl },   { "lshr", opcode::lshr },
            { "ashr", opcode::ashr },
        };
        for ( auto &[ name, op ] : table )
            if ( name == n )
                return op;
        return std::nullopt;
    }

    static std::optional< icmp_pred > pred_from_name( std::string_view n )
    {
        static const std::pair< std::string_view, icmp_pred > table[] = {
            { "eq", icmp_pred::eq },   { "ne", icmp_pred::ne },   { "ult", icmp_pred::ult },
            { "ule", icmp_pred::ule }, { "ugt", icmp_pred::ugt }, { "uge", icmp_pred::uge },
            { "slt", icmp_pred::slt }, { "sle", icmp_pred::sle }, { "sgt", icmp_pred::sgt },
            { "sge", icmp_pred::sge },
        };
        for ( auto &[ name, p ] : table )
            if ( name == n )
                return p;
        return std::nullopt;
    }

    // labels collected in pass 0, resolved inline in pass 1
    std::unordered_map< std::string, uint32_t > labels;

    std::string parse_label_ref()
    {
        if ( lex.cur.kind != tk::ident )
            fail( "expected block label" );
        std::string s( lex.cur.text );
        lex.advance();
        return s;
    }

    uint32_t resolve_label( const std::string &name )
    {
        auto it = labels.find( name );
        if ( it == labels.end() )
            fail( "unknown block label '" + name + "'" );
        return it->second;
    }

    instruction parse_instruction( reg_scope &rs, bool first_pass )
    {
        instruction in;
        in.line = lex.cur.line;

        std::string result_name;
        bool has_result = false;
        if ( lex.cur.kind == tk::reg )
        {
            result_name = std::string( lex.cur.text );
            has_result = true;
            lex.advance();
            expect_punct( '=' );
        }

        if ( lex.cur.kind != tk::ident )
            fail( "expected opcode" );
        std::string op( lex.cur.text );
        lex.advance();

        auto need_result = [ & ]( vtype t )
        {
            if ( !has_result )
                fail( "'" + op + "' requires a result register" );
            in.result_type = t;
            if ( first_pass )
                in.result = rs.define( *this, result_name );
            else
                in.result = rs.lookup( *this, result_name );
        };
        auto no_result = [ & ]
        {
            if ( has_result )
                fail( "'" + op + "' does not produce a result" );
        };

        if ( auto b = binop_from_name( op ) )
        {
            in.op = *b;
            vtype t = parse_vtype();
            if ( !t.is_int() )
                fail( "binary ops take integer operands" );
            auto a0 = parse_operand_raw();
            expect_punct( ',' );
            auto a1 = parse_operand_raw();
            need_result( t );
            if ( !first_pass )
            {
                in.args.push_back( finish_operand( rs, a0, t ) );
                in.args.push_back( finish_operand( rs, a1, t ) );
            }
            return in;
        }

        if ( op == "icmp" )
        {
            in.op = opcode::icmp;
            auto p = pred_from_name( expect_ident( "icmp predicate" ) );
            if ( !p )
                fail( "unknown icmp predicate" );
            in.pred = *p;
            vtype t = parse_vtype();
            if ( !t.is_int() )
                fail( "icmp compares integer operands" );
            auto a0 = parse_operand_raw();
            expect_punct( ',' );
            auto a1 = parse_operand_raw();
            need_result( t_i1 );
            if ( !first_pass )
            {
                in.args.push_back( finish_operand( rs, a0, t ) );
                in.args.push_back( finish_operand( rs, a1, t ) );
            }
            return in;
        }

        if ( op == "zext" || op == "sext" || op == "trunc" )
        {
            in.op = op == "zext" ? opcode::zext : op == "sext" ? opcode::sext : opcode::trunc;
            vtype from = parse_vtype();
            auto a0 = parse_operand_raw();
            if ( !at_kw( "to" ) )
                fail( "expected 'to' in cast" );
            lex.advance();
            vtype to = parse_vtype();
            if ( !from.is_int() || !to.is_int() )
                fail( "casts operate on integer types" );
            in.cast_to = to;
            need_result( to );
            if ( !first_pass )
                in.args.push_back( finish_operand( rs, a0, from ) );
            return in;
        }

        if ( op == "alloca" )
        {
            in.op = opcode::alloca_;
            in.alloc = parse_mem_type();
            need_result( t_ptr );
            return in;
        }

        if ( op == "load" )
        {
            in.op = opcode::load;
            vtype t = parse_vtype();
            if ( t.is_aval() )
                fail( "aval cannot be loaded; use a_thaw" );
            expect_punct( ',' );
            auto a0 = parse_operand_raw();
            need_result( t );
            if ( !first_pass )
                in.args.push_back( finish_operand( rs, a0, t_ptr ) );
            return in;
        }

        if ( op == "store" )
        {
            in.op = opcode::store;
            no_result();
            vtype t = parse_vtype();
            if ( t.is_aval() )
                fail( "aval cannot be stored; use a_freeze" );
            auto v = parse_operand_raw();
            expect_punct( ',' );
            auto a = parse_operand_raw();
            if ( !first_pass )
            {
                in.args.push_back( finish_operand( rs, v, t ) );
                in.args.push_back( finish_operand( rs, a, t_ptr ) );
            }
            return in;
        }

        if ( op == "ptradd" )
        {
            in.op = opcode::ptradd;
            auto base = parse_operand_raw();
            expect_punct( ',' );
            auto off = parse_operand_raw();
            need_result( t_ptr );
            if ( !first_pass )
            {
                in.args.push_back( finish_operand( rs, base, t_ptr ) );
                in.args.push_back( finish_operand( rs, off, t_int( 64 ) ) );
            }
            return in;
        }

        if ( op == "br" )
        {
            in.op = opcode::br;
            no_result();
            if ( lex.cur.kind == tk::reg )
            {
                auto c = parse_operand_raw();
                expect_punct( ',' );
                std::string t = parse_label_ref();
                expect_punct( ',' );
                std::string f = parse_label_ref();
                if ( !first_pass )
                {
                    in.args.push_back( finish_operand( rs, c, t_i1 ) );
                    in.target = resolve_label( t );
                    in.target_false = resolve_label( f );
                }
            }
            else
            {
                std::string t = parse_label_ref();
                if ( !first_pass )
                    in.target = resolve_label( t );
            }
            return in;
        }

        if ( op == "phi" )
        {
            in.op = opcode::phi;
            vtype t = parse_vtype();
            need_result( t );
            bool first = true;
            while ( first || eat_punct( ',' ) )
            {
                first = false;
                expect_punct( '[' );
                auto v = parse_operand_raw();
                expect_punct( ',' );
                std::string lbl = parse_label_ref();
                expect_punct( ']' );
                if ( !first_pass )
                {
                    phi_in pi;
                    pi.value = finish_operand( rs, v, t );
                    pi.block = resolve_label( lbl );
                    in.incoming.push_back( pi );
                }
                if ( lex.cur.kind == tk::eol || lex.cur.kind == tk::eof )
                    break;
            }
            return in;
        }

        if ( op == "call" )
        {
            in.op = opcode::call;
            vtype ret{};
            bool is_void = at_kw( "void" );
            if ( is_void )
                lex.advance();
            else
                ret = parse_vtype();
            if ( lex.cur.kind != tk::global )
                fail( "expected callee @name" );
            in.callee = std::string( lex.cur.text );
            lex.advance();
            expect_punct( '(' );
            std::vector< std::pair< vtype, pending_operand > > raw_args;
            if ( !at_punct( ')' ) )
            {
                do
                {
                    vtype at = parse_vtype();
                    raw_args.emplace_back( at, parse_operand_raw() );
                } while ( eat_punct( ',' ) );
            }
            expect_punct( ')' );
            if ( is_void )
                no_result();
            else
                need_result( ret );
            if ( !first_pass )
                for ( auto &[ at, po ] : raw_args )
                    in.args.push_back( finish_operand( rs, po, at ) );
            return in;
        }

        if ( op == "ret" )
        {
            in.op = opcode::ret;
            no_result();
            if ( at_kw( "void" ) )
            {
                lex.advance();
                return in;
            }
            vtype t = parse_vtype();
            auto v = parse_operand_raw();
            if ( !first_pass )
                in.args.push_back( finish_operand( rs, v, t ) );
            return in;
        }

        fail( "unknown opcode '" + op + "'" );
    }

    function parse_function()
    {
        function fn;
        if ( !at_kw( "fn" ) )
            fail( "expected 'fn'" );
        lex.advance();
        if ( lex.cur.kind != tk::global )
            fail( "expected function name @name" );
        fn.name = std::string( lex.cur.text );
        fn.origin = fn.name;
        lex.advance();
        expect_punct( '(' );
        if ( !at_punct( ')' ) )
        {
            do
            {
                if ( lex.cur.kind != tk::reg )
                    fail( "expected parameter %name" );
                std::string pname( lex.cur.text );
                lex.advance();
                expect_punct( ':' );
                vtype pt = parse_vtype();
                fn.params.push_back( { pname, pt } );
            } while ( eat_punct( ',' ) );
        }
        expect_punct( ')' );
        if ( !at_punct( '-' ) )
            fail( "expected '->'" );
        lex.advance();
        expect_punct( '>' );
        if ( at_kw( "void" ) )
        {
            fn.returns_void = true;
            lex.advance();
        }
        else
            fn.ret_type = parse_vtype();
        expect_punct( '{' );
        skip_eol();

        // remember the body start so the second pass can re-lex it
        size_t body_pos = lex.pos;
        lexer::token body_tok = lex.cur;
        uint32_t body_line = lex.line, body_col = lex.col;

        reg_scope rs;
        rs.fn = &fn;
        for ( auto &p : fn.params )
            rs.define( *this, p.name );

        // pass 0 collects block labels and register definitions; pass 1 builds
        labels.clear();
        for ( int pass = 0; pass < 2; ++pass )
        {
            if ( pass == 1 )
            {
                lex.pos = body_pos;
                lex.cur = body_tok;
                lex.line = body_line;
                lex.col = body_col;
                fn.blocks.clear();
            }
            basic_block *bb = nullptr;
            uint32_t bbi = no_block;
            while ( !at_punct( '}' ) )
            {
                if ( lex.cur.kind == tk::eof )
                    fail( "unexpected end of input in function body" );
                if ( lex.cur.kind == tk::eol )
                {
                    lex.advance();
                    continue;
                }
                // a label is an identifier followed by ':'
                if ( lex.cur.kind == tk::ident )
                {
                    size_t save = lex.pos;
                    auto tok = lex.cur;
                    auto sl = lex.line;
                    auto sc = lex.col;
                    std::string name( lex.cur.text );
                    lex.advance();
                    if ( at_punct( ':' ) )
                    {
                        lex.advance();
                        if ( pass == 0 )
                        {
                            if ( !labels.try_emplace( name, uint32_t( fn.blocks.size() ) ).second )
                                fail( "duplicate block label '" + name + "'" );
                        }
                        fn.blocks.push_back( { name, {} } );
                        bbi = uint32_t( fn.blocks.size() - 1 );
                        bb = &fn.blocks[ bbi ];
                        continue;
                    }
                    lex.pos = save;
                    lex.cur = tok;
                    lex.line = sl;
                    lex.col = sc;
                }
                if ( !bb )
                    fail( "instruction before first block label" );
                instruction in = parse_instruction( rs, pass == 0 );
                if ( pass == 1 )
                {
                    bb = &fn.blocks[ bbi ]; // vector may have grown elsewhere
                    bb->insts.push_back( std::move( in ) );
                }
                if ( lex.cur.kind != tk::eol && lex.cur.kind != tk::eof && !at_punct( '}' ) )
                    fail( "unexpected token after instruction" );
            }
        }
        expect_punct( '}' );
        return fn;
    }

    ir_module parse_module()
    {
        skip_eol();
        while ( lex.cur.kind != tk::eof )
        {
            mod.functions.push_back( parse_function() );
            skip_eol();
        }
        return mod;
    }
};

} // namespace detail

inline parse_result parse_module( std::string_view text )
{
    detail::parser p( text );
    parse_result r;
    try
    {
        r.module = p.parse_module();
        // duplicate function names are a parse-level error
        for ( size_t i = 0; i < r.module->functions.size(); ++i )
            for ( size_t j = i + 1; j < r.module->functions.size(); ++j )
                if ( r.module->functions[ i ].name == r.module->functions[ j ].name )
                    r.errors.push_back(
                        { 0, 0, "duplicate function @" + r.module->functions[ i ].name } );
    }
    catch ( const diagnostic & )
    {
        r.module.reset();
    }
    r.errors.insert( r.errors.end(), p.errs.begin(), p.errs.end() );
    if ( !r.errors.empty() )
        r.module.reset();
    return r;
}

} // namespace symtrans
