#pragma once

#include <filesystem>
#include <fstream>
#include <random>

#include <catch2/catch_amalgamated.hpp>

#include <symtrans/parse.hpp>
#include <symtrans/print.hpp>
#include <symtrans/validate.hpp>

namespace harness
{

inline std::string corpus_dir()
{
#ifdef SYMTRANS_CORPUS_DIR
    return SYMTRANS_CORPUS_DIR;
#else
    return "corpus";
#endif
}

inline std::vector< std::string > corpus_files()
{
    std::vector< std::string > out;
    for ( auto &e : std::filesystem::directory_iterator( corpus_dir() ) )
        if ( e.path().extension() == ".sir" )
            out.push_back( e.path().string() );
    std::sort( out.begin(), out.end() );
    return out;
}

inline std::string slurp( const std::string &path )
{
    std::ifstream in( path, std::ios::binary );
    REQUIRE( in );
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

inline symtrans::ir_module load( const std::string &path )
{
    auto pr = symtrans::parse_module( slurp( path ) );
    INFO( path << ": " << symtrans::join_diags( pr.errors ) );
    REQUIRE( pr.ok() );
    auto vd = symtrans::validate( *pr.module );
    INFO( path << ": " << symtrans::join_diags( vd ) );
    REQUIRE( vd.empty() );
    return std::move( *pr.module );
}

inline symtrans::ir_module load_text( const std::string &text )
{
    auto pr = symtrans::parse_module( text );
    INFO( symtrans::join_diags( pr.errors ) );
    REQUIRE( pr.ok() );
    auto vd = symtrans::validate( *pr.module );
    INFO( symtrans::join_diags( vd ) );
    REQUIRE( vd.empty() );
    return std::move( *pr.module );
}

} // namespace harness
