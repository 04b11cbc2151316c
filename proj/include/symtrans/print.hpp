#pragma once

#include <sstream>

#include "ir.hpp"

namespace symtrans
{

// canonical text form: parse_module(print_module(m)) is structurally m, and
// printing is idempotent after one parse/print normalization
namespace detail
{

inline void print_vtype( std::ostream &os, vtype t )
{
    if ( t.is_ptr() )
        os << "ptr";
    else if ( t.is_aval() )
        os << "aval";
    else
        os << "i" << int( t.bits );
}

inline void print_mem_type( std::ostream &os, const mem_type &t )
{
    switch ( t.kind )
    {
        case mem_type::k::scalar:
            print_vtype( os, t.scalar );
            break;
        case mem_type::k::array:
            os << "[" << t.count << " x ";
            print_mem_type( os, t.sub[ 0 ] );
            os << "]";
            break;
        case mem_type::k::record:
            os << "{";
            for ( size_t i = 0; i < t.sub.size(); ++i )
            {
                if ( i )
                    os << ", ";
                print_mem_type( os, t.sub[ i ] );
            }
            os << "}";
            break;
    }
}

inline void print_operand( std::ostream &os, const function &fn, const operand &o )
{
    if ( o.is_reg() )
        os << "%" << fn.reg_names[ o.reg ];
    else
        os << o.imm;
}

inline void print_instruction( std::ostream &os, const function &fn, const instruction &in )
{
    auto operand_at = [ & ]( size_t i ) -> const operand & { return in.args[ i ]; };

    if ( in.result != no_reg )
        os << "%" << fn.reg_names[ in.result ] << " = ";

    if ( is_binop( in.op ) )
    {
        os << opcode_name( in.op ) << " ";
        print_vtype( os, operand_at( 0 ).type );
        os << " ";
        print_operand( os, fn, operand_at( 0 ) );
        os << ", ";
        print_operand( os, fn, operand_at( 1 ) );
        return;
    }

    switch ( in.op )
    {
        case opcode::icmp:
            os << "icmp " << pred_name( in.pred ) << " ";
            print_vtype( os, operand_at( 0 ).type );
            os << " ";
            print_operand( os, fn, operand_at( 0 ) );
            os << ", ";
            print_operand( os, fn, operand_at( 1 ) );
            return;
        case opcode::zext:
        case opcode::sext:
        case opcode::trunc:
            os << opcode_name( in.op ) << " ";
            print_vtype( os, operand_at( 0 ).type );
            os << " ";
            print_operand( os, fn, operand_at( 0 ) );
            os << " to ";
            print_vtype( os, in.cast_to );
            return;
        case opcode::alloca_:
            os << "alloca ";
            print_mem_type( os, in.alloc );
            return;
        case opcode::load:
            os << "load ";
            print_vtype( os, in.result_type );
            os << ", ";
            print_operand( os, fn, operand_at( 0 ) );
            return;
        case opcode::store:
            os << "store ";
            print_vtype( os, operand_at( 0 ).type );
            os << " ";
            print_operand( os, fn, operand_at( 0 ) );
            os << ", ";
            print_operand( os, fn, operand_at( 1 ) );
            return;
        case opcode::ptradd:
            os << "ptradd ";
            print_operand( os, fn, operand_at( 0 ) );
            os << ", ";
            print_operand( os, fn, operand_at( 1 ) );
            return;
        case opcode::br:
            if ( in.is_cond_br() )
            {
                os << "br ";
                print_operand( os, fn, operand_at( 0 ) );
                os << ", " << fn.blocks[ in.target ].label << ", "
                   << fn.blocks[ in.target_false ].label;
            }
            else
                os << "br " << fn.blocks[ in.target ].label;
            return;
        case opcode::phi:
            os << "phi ";
            print_vtype( os, in.result_type );
            os << " ";
            for ( size_t i = 0; i < in.incoming.size(); ++i )
            {
                if ( i )
                    os << ", ";
                os << "[ ";
                print_operand( os, fn, in.incoming[ i ].value );
                os << ", " << fn.blocks[ in.incoming[ i ].block ].label << " ]";
            }
            return;
        case opcode::call:
            os << "call ";
            if ( in.result == no_reg )
                os << "void";
            else
                print_vtype( os, in.result_type );
            os << " @" << in.callee << "(";
            for ( size_t i = 0; i < in.args.size(); ++i )
            {
                if ( i )
                    os << ", ";
                print_vtype( os, in.args[ i ].type );
                os << " ";
                print_operand( os, fn, in.args[ i ] );
            }
            os << ")";
            return;
        case opcode::ret:
            if ( in.args.empty() )
                os << "ret void";
            else
            {
                os << "ret ";
                print_vtype( os, operand_at( 0 ).type );
                os << " ";
                print_operand( os, fn, operand_at( 0 ) );
            }
            return;
        default:
            os << "<?>";
    }
}

} // namespace detail

inline void print_function( std::ostream &os, const function &fn )
{
    os << "fn @" << fn.name << "(";
    for ( size_t i = 0; i < fn.params.size(); ++i )
    {
        if ( i )
            os << ", ";
        os << "%" << fn.params[ i ].name << ": ";
        detail::print_vtype( os, fn.params[ i ].type );
    }
    os << ") -> ";
    if ( fn.returns_void )
        os << "void";
    else
        detail::print_vtype( os, fn.ret_type );
    os << " {\n";
    for ( auto &bb : fn.blocks )
    {
        os << bb.label << ":\n";
        for ( auto &in : bb.insts )
        {
            os << "  ";
            detail::print_instruction( os, fn, in );
            os << "\n";
        }
    }
    os << "}\n";
}

inline std::string print_module( const ir_module &m )
{
    std::ostringstream os;
    for ( size_t i = 0; i < m.functions.size(); ++i )
    {
        if ( i )
            os << "\n";
        print_function( os, m.functions[ i ] );
    }
    return os.str();
}

} // namespace symtrans
