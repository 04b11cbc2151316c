#pragma once

#include <memory>
#include <optional>

#include "bitops.hpp"
#include "solver.hpp"
#include "term.hpp"

namespace symtrans
{

using handle_t = uint64_t;

/*
 * The toplevel sum domain C ⊔ S: every register the transformation types as
 * `aval` holds one of these. Concrete-tagged values carry plain bits; an
 * abstract tag carries an opaque handle valid in exactly one domain's store.
 */
struct abstract_value
{
    enum class tag_t : uint8_t { concrete, abstract };

    tag_t tag = tag_t::concrete;
    uint8_t domain = 0;
    vtype static_type = t_int( 32 );
    uint64_t payload = 0; // bits when concrete (masked), handle when abstract

    bool is_concrete() const { return tag == tag_t::concrete; }
    bool is_abstract() const { return tag == tag_t::abstract; }

    static abstract_value concrete( uint64_t v, vtype t )
    {
        return { tag_t::concrete, 0, t, t.is_int() ? bits::trunc( v, t.bits ) : v };
    }
    static abstract_value abstract( uint8_t dom, handle_t h, vtype t )
    {
        return { tag_t::abstract, dom, t, h };
    }

    friend bool operator==( const abstract_value &, const abstract_value & ) = default;
};

// mutable per-state domain storage (parity cells and the like); the term
// domain keeps nothing here because its nodes are immutable arena values
struct domain_state
{
    std::vector< uint64_t > cells;
    std::vector< std::array< uint64_t, 3 > > meta;

    friend bool operator==( const domain_state &, const domain_state & ) = default;
};

enum class assume_effect : uint8_t { ok, infeasible };
enum class decided : uint8_t { is_true, is_false, undetermined };

// everything a domain hook may touch, threaded through by the VM
struct exec_ctx
{
    term_arena &arena;          // worker-global, append-only
    symbol_table &symbols;      // per-path
    path_condition &pc;         // per-path
    domain_state &dstate;       // per-path
    solver_backend *solver = nullptr;

    // out-parameters surfaced as VM events after the hook returns
    term_id pending_div_guard = no_term; // term domain: abstract divisor
    bool pending_div_unknown = false;    // non-relational domain divided abstractly
};

struct domain_descriptor
{
    std::string domain_name;
    uint8_t id = 0;

    virtual ~domain_descriptor() = default;

    virtual bool supports( opcode op, icmp_pred pred, int width ) const = 0;

    virtual handle_t op_binary( opcode op, int width, handle_t a, handle_t b, exec_ctx & ) = 0;
    virtual handle_t op_icmp( icmp_pred p, int width, handle_t a, handle_t b, exec_ctx & ) = 0;
    virtual handle_t op_cast( opcode op, int from_w, int to_w, handle_t a, exec_ctx & ) = 0;

    virtual handle_t lift( uint64_t value, vtype t, exec_ctx & ) = 0;
    virtual std::optional< uint64_t > lower( handle_t h, vtype t, exec_ctx &,
                                             std::string &error ) = 0;

    virtual handle_t fresh_input( int width, exec_ctx & ) = 0;
    virtual assume_effect assume( handle_t cond, int direction, exec_ctx & ) = 0;
    virtual decided decide_i1( handle_t cond, const exec_ctx & ) const = 0;

    // representation hooks: frozen payload stored in shadow memory
    virtual uint64_t freeze( handle_t h, exec_ctx & ) { return h; }
    virtual handle_t thaw( uint64_t frozen, vtype, exec_ctx & ) { return frozen; }

    // whether an abstract i1 can be undetermined (forces choose/assume forks)
    virtual bool i1_can_fork() const { return true; }

    // true when handles (and frozen payloads) are term-arena ids that
    // snapshots must extract and re-intern to stay worker-portable
    virtual bool handles_are_terms() const { return false; }

    virtual std::string describe( handle_t h, const exec_ctx & ) const
    {
        return domain_name + "#" + std::to_string( h );
    }
};

struct domain_registry
{
    std::vector< std::unique_ptr< domain_descriptor > > domains;

    domain_descriptor *find( std::string_view name ) const
    {
        for ( auto &d : domains )
            if ( d->domain_name == name )
                return d.get();
        return nullptr;
    }

    domain_descriptor *by_id( uint8_t id ) const
    {
        for ( auto &d : domains )
            if ( d->id == id )
                return d.get();
        return nullptr;
    }

    uint8_t add( std::unique_ptr< domain_descriptor > d )
    {
        d->id = uint8_t( domains.size() + 1 );
        domains.push_back( std::move( d ) );
        return domains.back()->id;
    }
};

/*
 * A lifter dispatches one operation over the sum domain: two concrete
 * operands take the pure concrete fast path (no handle is ever allocated),
 * two abstract operands call the domain op directly, and a mixed pair
 * lifts the concrete side first. Synthesized deterministically, one per
 * (operation, width, domain).
 */
struct lifter
{
    opcode op = opcode::add;
    icmp_pred pred = icmp_pred::eq;
    bool is_icmp = false;
    int width = 0;    // operand width
    int width_to = 0; // cast result width
    domain_descriptor *dom = nullptr;

    struct outcome
    {
        abstract_value value;
        bool trap_div_zero = false;
    };

    vtype result_type() const
    {
        if ( is_icmp )
            return t_i1;
        if ( is_cast( op ) )
            return t_int( width_to );
        return t_int( width );
    }

    outcome dispatch_binary( const abstract_value &a, const abstract_value &b, exec_ctx &ctx ) const
    {
        vtype rt = result_type();

        if ( a.is_concrete() && b.is_concrete() )
        {
            if ( is_icmp )
            {
                auto v = fold_binary( term_op_of( pred ), a.payload, b.payload, width );
                return { abstract_value::concrete( *v, rt ), false };
            }
            auto v = fold_binary( term_op_of( op ), a.payload, b.payload, width );
            if ( !v )
                return { abstract_value::concrete( 0, rt ), true };
            return { abstract_value::concrete( *v, rt ), false };
        }

        // a concrete divisor decides trap-or-not regardless of the dividend
        if ( is_div_like( op ) && b.is_concrete() && b.payload == 0 )
            return { abstract_value::concrete( 0, rt ), true };

        handle_t ha = a.is_abstract() ? a.payload : dom->lift( a.payload, a.static_type, ctx );
        handle_t hb = b.is_abstract() ? b.payload : dom->lift( b.payload, b.static_type, ctx );
        handle_t r = is_icmp ? dom->op_icmp( pred, width, ha, hb, ctx )
                             : dom->op_binary( op, width, ha, hb, ctx );
        return { abstract_value::abstract( dom->id, r, rt ), false };
    }

    outcome dispatch_cast( const abstract_value &a, exec_ctx &ctx ) const
    {
        vtype rt = result_type();
        if ( a.is_concrete() )
        {
            uint64_t v = op == opcode::zext   ? bits::zext( a.payload, width, width_to )
                         : op == opcode::sext ? bits::sext( a.payload, width, width_to )
                                              : bits::trunc( a.payload, width_to );
            return { abstract_value::concrete( v, rt ), false };
        }
        handle_t r = dom->op_cast( op, width, width_to, a.payload, ctx );
        return { abstract_value::abstract( dom->id, r, rt ), false };
    }
};

struct unsupported_op : std::exception
{
    std::string what_;
    explicit unsupported_op( std::string w ) : what_( std::move( w ) ) {}
    const char *what() const noexcept override { return what_.c_str(); }
};

inline lifter synthesize_lifter_binary( opcode op, int width, domain_descriptor &d )
{
    if ( !d.supports( op, icmp_pred::eq, width ) )
        throw unsupported_op( "domain " + d.domain_name + " does not support " +
                              std::string( opcode_name( op ) ) + " at i" + std::to_string( width ) );
    lifter l;
    l.op = op;
    l.width = width;
    l.dom = &d;
    return l;
}

inline lifter synthesize_lifter_icmp( icmp_pred p, int width, domain_descriptor &d )
{
    if ( !d.supports( opcode::icmp, p, width ) )
        throw unsupported_op( "domain " + d.domain_name + " does not support icmp at i" +
                              std::to_string( width ) );
    lifter l;
    l.is_icmp = true;
    l.pred = p;
    l.width = width;
    l.dom = &d;
    return l;
}

inline lifter synthesize_lifter_cast( opcode op, int from_w, int to_w, domain_descriptor &d )
{
    if ( !d.supports( op, icmp_pred::eq, from_w ) )
        throw unsupported_op( "domain " + d.domain_name + " does not support " +
                              std::string( opcode_name( op ) ) );
    lifter l;
    l.op = op;
    l.width = from_w;
    l.width_to = to_w;
    l.dom = &d;
    return l;
}

} // namespace symtrans
