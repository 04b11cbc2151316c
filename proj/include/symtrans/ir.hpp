#pragma once

#include <cassert>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace symtrans
{

constexpr uint32_t no_reg = ~0u;
constexpr uint32_t no_block = ~0u;

// register-level value categories: fixed-width integers, 8-byte pointers and
// the 8-byte abstract-value sum type introduced by the transformation
enum class vkind : uint8_t { integer, pointer, abstract };

struct vtype
{
    vkind kind = vkind::integer;
    uint8_t bits = 32; // meaningful for integers only

    bool is_int() const { return kind == vkind::integer; }
    bool is_int( int w ) const { return is_int() && bits == w; }
    bool is_ptr() const { return kind == vkind::pointer; }
    bool is_aval() const { return kind == vkind::abstract; }

    int byte_size() const
    {
        if ( kind != vkind::integer )
            return 8;
        return bits == 1 ? 1 : bits / 8;
    }

    friend bool operator==( const vtype &, const vtype & ) = default;
};

constexpr vtype t_int( int w ) { return { vkind::integer, uint8_t( w ) }; }
constexpr vtype t_i1 = t_int( 1 );
constexpr vtype t_ptr{ vkind::pointer, 64 };
constexpr vtype t_aval{ vkind::abstract, 64 };

inline bool valid_width( int w )
{
    return w == 1 || w == 8 || w == 16 || w == 32 || w == 64;
}

// memory-resident types: scalars plus finite arrays and packed records
struct mem_type
{
    enum class k : uint8_t { scalar, array, record };

    k kind = k::scalar;
    vtype scalar = t_int( 32 );
    std::vector< mem_type > sub; // array: one element type; record: fields
    uint64_t count = 0;          // array length

    uint64_t byte_size() const
    {
        switch ( kind )
        {
            case k::scalar: return scalar.byte_size();
            case k::array:  return count * sub[ 0 ].byte_size();
            case k::record:
            {
                uint64_t total = 0;
                for ( auto &f : sub )
                    total += f.byte_size();
                return total;
            }
        }
        return 0;
    }

    // packed layout: field offsets are running sums, no padding
    uint64_t field_offset( size_t idx ) const
    {
        assert( kind == k::record && idx < sub.size() );
        uint64_t off = 0;
        for ( size_t i = 0; i < idx; ++i )
            off += sub[ i ].byte_size();
        return off;
    }

    friend bool operator==( const mem_type &, const mem_type & ) = default;
};

inline mem_type mt_scalar( vtype t ) { return { mem_type::k::scalar, t, {}, 0 }; }

enum class opcode : uint8_t
{
    add, sub, mul, udiv, sdiv, urem, srem,
    band, bor, bxor, shl, lshr, ashr,
    icmp, zext, sext, trunc,
    alloca_, load, store, ptradd,
    br, phi, call, ret,
};

enum class icmp_pred : uint8_t { eq, ne, ult, ule, ugt, uge, slt, sle, sgt, sge };

inline bool is_binop( opcode op ) { return op <= opcode::ashr; }
inline bool is_cast( opcode op )
{
    return op == opcode::zext || op == opcode::sext || op == opcode::trunc;
}
inline bool is_div_like( opcode op )
{
    return op == opcode::udiv || op == opcode::sdiv || op == opcode::urem || op == opcode::srem;
}
inline bool is_terminator( opcode op ) { return op == opcode::br || op == opcode::ret; }

inline std::string_view opcode_name( opcode op )
{
    switch ( op )
    {
        case opcode::add: return "add";       case opcode::sub: return "sub";
        case opcode::mul: return "mul";       case opcode::udiv: return "udiv";
        case opcode::sdiv: return "sdiv";     case opcode::urem: return "urem";
        case opcode::srem: return "srem";     case opcode::band: return "and";
        case opcode::bor: return "or";        case opcode::bxor: return "xor";
        case opcode::shl: return "shl";       case opcode::lshr: return "lshr";
        case opcode::ashr: return "ashr";     case opcode::icmp: return "icmp";
        case opcode::zext: return "zext";     case opcode::sext: return "sext";
        case opcode::trunc: return "trunc";   case opcode::alloca_: return "alloca";
        case opcode::load: return "load";     case opcode::store: return "store";
        case opcode::ptradd: return "ptradd"; case opcode::br: return "br";
        case opcode::phi: return "phi";       case opcode::call: return "call";
        case opcode::ret: return "ret";
    }
    return "?";
}

inline std::string_view pred_name( icmp_pred p )
{
    switch ( p )
    {
        case icmp_pred::eq: return "eq";   case icmp_pred::ne: return "ne";
        case icmp_pred::ult: return "ult"; case icmp_pred::ule: return "ule";
        case icmp_pred::ugt: return "ugt"; case icmp_pred::uge: return "uge";
        case icmp_pred::slt: return "slt"; case icmp_pred::sle: return "sle";
        case icmp_pred::sgt: return "sgt"; case icmp_pred::sge: return "sge";
    }
    return "?";
}

struct operand
{
    enum class k : uint8_t { reg, imm };

    k kind = k::imm;
    uint32_t reg = no_reg;
    uint64_t imm = 0;
    vtype type;

    static operand make_reg( uint32_t r, vtype t ) { return { k::reg, r, 0, t }; }
    static operand make_imm( uint64_t v, vtype t ) { return { k::imm, no_reg, v, t }; }
    bool is_reg() const { return kind == k::reg; }

    friend bool operator==( const operand &, const operand & ) = default;
};

struct phi_in
{
    operand value;
    uint32_t block = no_block;

    friend bool operator==( const phi_in &, const phi_in & ) = default;
};

// call targets resolved during validation
enum class callee_kind : uint8_t
{
    user,                                     // defined function in the module
    sym, choose, assume_, assert_, lower, print,
    a_sym, a_lift, a_lower, a_freeze, a_thaw, // sum injection + shadow memory
    a_op, a_icmp, a_cast, a_assume, a_assert, // domain table dispatch
};

struct callee_info
{
    callee_kind kind = callee_kind::user;
    uint8_t width = 0;       // iN of the operation
    uint8_t width_to = 0;    // cast target width
    opcode op = opcode::add; // base opcode of a_op / a_cast
    icmp_pred pred = icmp_pred::eq;
    std::string domain;      // empty for domain-independent entry points

    friend bool operator==( const callee_info &, const callee_info & ) = default;
};

struct instruction
{
    opcode op = opcode::add;
    uint32_t result = no_reg;
    vtype result_type;
    std::vector< operand > args;

    icmp_pred pred = icmp_pred::eq;     // icmp
    vtype cast_to;                      // zext/sext/trunc
    mem_type alloc;                     // alloca
    std::vector< phi_in > incoming;     // phi
    std::string callee;                 // call
    callee_info ci;                     // filled by validate()
    uint32_t target = no_block;         // br: taken edge (cond == 1) or sole target
    uint32_t target_false = no_block;   // br: cond == 0 edge
    uint32_t line = 0;

    bool is_cond_br() const { return op == opcode::br && !args.empty(); }

    friend bool operator==( const instruction &, const instruction & ) = default;
};

struct basic_block
{
    std::string label;
    std::vector< instruction > insts;

    const instruction &terminator() const { return insts.back(); }

    friend bool operator==( const basic_block &, const basic_block & ) = default;
};

struct function
{
    struct param
    {
        std::string name;
        vtype type;
        friend bool operator==( const param &, const param & ) = default;
    };

    std::string name;
    std::string origin;          // pre-clone identity; equals name unless cloned
    std::vector< param > params;
    bool returns_void = false;
    vtype ret_type;
    std::vector< basic_block > blocks; // blocks[0] is the entry
    std::vector< std::string > reg_names;
    std::vector< vtype > reg_types;    // filled by validate()

    uint32_t find_block( std::string_view label ) const
    {
        for ( uint32_t i = 0; i < blocks.size(); ++i )
            if ( blocks[ i ].label == label )
                return i;
        return no_block;
    }

    const std::string &site_origin() const { return origin.empty() ? name : origin; }

    friend bool operator==( const function &, const function & ) = default;
};

struct ir_module
{
    std::vector< function > functions;

    function *find( std::string_view name )
    {
        for ( auto &f : functions )
            if ( f.name == name )
                return &f;
        return nullptr;
    }

    const function *find( std::string_view name ) const
    {
        return const_cast< ir_module * >( this )->find( name );
    }

    friend bool operator==( const ir_module &, const ir_module & ) = default;
};

// structural equality: ignores source line numbers and derived callee info
inline ir_module normalized_copy( const ir_module &m )
{
    ir_module c = m;
    for ( auto &f : c.functions )
    {
        f.reg_types.clear();
        for ( auto &b : f.blocks )
            for ( auto &i : b.insts )
            {
                i.line = 0;
                i.ci = callee_info{};
            }
    }
    return c;
}

inline bool structurally_equal( const ir_module &a, const ir_module &b )
{
    return normalized_copy( a ) == normalized_copy( b );
}

} // namespace symtrans
