#pragma once

#include <cstdint>
#include <optional>

namespace symtrans::bits
{

constexpr uint64_t mask( int width )
{
    return width >= 64 ? ~0ull : ( 1ull << width ) - 1;
}

constexpr uint64_t trunc( uint64_t v, int width )
{
    return v & mask( width );
}

// sign-extend the low `width` bits of v into a full int64
constexpr int64_t to_signed( uint64_t v, int width )
{
    uint64_t m = 1ull << ( width - 1 );
    uint64_t t = trunc( v, width );
    return static_cast< int64_t >( ( t ^ m ) - m );
}

constexpr uint64_t zext( uint64_t v, int from, int )
{
    return trunc( v, from );
}

constexpr uint64_t sext( uint64_t v, int from, int to )
{
    return trunc( static_cast< uint64_t >( to_signed( v, from ) ), to );
}

constexpr bool sign_bit( uint64_t v, int width )
{
    return ( v >> ( width - 1 ) ) & 1;
}

constexpr uint64_t add( uint64_t a, uint64_t b, int w ) { return trunc( a + b, w ); }
constexpr uint64_t sub( uint64_t a, uint64_t b, int w ) { return trunc( a - b, w ); }
constexpr uint64_t mul( uint64_t a, uint64_t b, int w ) { return trunc( a * b, w ); }

constexpr uint64_t and_( uint64_t a, uint64_t b, int w ) { return trunc( a & b, w ); }
constexpr uint64_t or_ ( uint64_t a, uint64_t b, int w ) { return trunc( a | b, w ); }
constexpr uint64_t xor_( uint64_t a, uint64_t b, int w ) { return trunc( a ^ b, w ); }

// shift amounts >= width follow SMT-LIB bitvector semantics (no UB, no trap)
constexpr uint64_t shl( uint64_t a, uint64_t b, int w )
{
    uint64_t sh = trunc( b, w );
    return sh >= uint64_t( w ) ? 0 : trunc( trunc( a, w ) << sh, w );
}

constexpr uint64_t lshr( uint64_t a, uint64_t b, int w )
{
    uint64_t sh = trunc( b, w );
    return sh >= uint64_t( w ) ? 0 : trunc( a, w ) >> sh;
}

constexpr uint64_t ashr( uint64_t a, uint64_t b, int w )
{
    uint64_t sh = trunc( b, w );
    if ( sh >= uint64_t( w ) )
        return sign_bit( a, w ) ? mask( w ) : 0;
    return trunc( static_cast< uint64_t >( to_signed( a, w ) >> sh ), w );
}

// division: nullopt signals the division-by-zero trap
constexpr std::optional< uint64_t > udiv( uint64_t a, uint64_t b, int w )
{
    uint64_t d = trunc( b, w );
    if ( !d )
        return std::nullopt;
    return trunc( a, w ) / d;
}

constexpr std::optional< uint64_t > urem( uint64_t a, uint64_t b, int w )
{
    uint64_t d = trunc( b, w );
    if ( !d )
        return std::nullopt;
    return trunc( a, w ) % d;
}

constexpr std::optional< uint64_t > sdiv( uint64_t a, uint64_t b, int w )
{
    if ( !trunc( b, w ) )
        return std::nullopt;
    int64_t sa = to_signed( a, w ), sb = to_signed( b, w );
    if ( sb == -1 && trunc( a, w ) == ( 1ull << ( w - 1 ) ) )
        return trunc( a, w ); // INT_MIN / -1 wraps to INT_MIN
    return trunc( static_cast< uint64_t >( sa / sb ), w );
}

constexpr std::optional< uint64_t > srem( uint64_t a, uint64_t b, int w )
{
    if ( !trunc( b, w ) )
        return std::nullopt;
    int64_t sa = to_signed( a, w ), sb = to_signed( b, w );
    if ( sb == -1 )
        return 0;
    return trunc( static_cast< uint64_t >( sa % sb ), w );
}

constexpr uint64_t cmp_eq ( uint64_t a, uint64_t b, int w ) { return trunc( a, w ) == trunc( b, w ); }
constexpr uint64_t cmp_ne ( uint64_t a, uint64_t b, int w ) { return trunc( a, w ) != trunc( b, w ); }
constexpr uint64_t cmp_ult( uint64_t a, uint64_t b, int w ) { return trunc( a, w ) <  trunc( b, w ); }
constexpr uint64_t cmp_ule( uint64_t a, uint64_t b, int w ) { return trunc( a, w ) <= trunc( b, w ); }
constexpr uint64_t cmp_ugt( uint64_t a, uint64_t b, int w ) { return trunc( a, w ) >  trunc( b, w ); }
constexpr uint64_t cmp_uge( uint64_t a, uint64_t b, int w ) { return trunc( a, w ) >= trunc( b, w ); }
constexpr uint64_t cmp_slt( uint64_t a, uint64_t b, int w ) { return to_signed( a, w ) <  to_signed( b, w ); }
constexpr uint64_t cmp_sle( uint64_t a, uint64_t b, int w ) { return to_signed( a, w ) <= to_signed( b, w ); }
constexpr uint64_t cmp_sgt( uint64_t a, uint64_t b, int w ) { return to_signed( a, w ) >  to_signed( b, w ); }
constexpr uint64_t cmp_sge( uint64_t a, uint64_t b, int w ) { return to_signed( a, w ) >= to_signed( b, w ); }

} // namespace symtrans::bits
