#pragma once

#include <json.hpp>

#include "explorer.hpp"

namespace symtrans
{

constexpr const char *report_schema_version = "v1";

// the machine-readable verification report; one JSON document, stable keys
inline nlohmann::json report_json( const verdict &v, const std::string &program,
                                   const explore_config &cfg )
{
    nlohmann::json j;
    j[ "schema" ] = report_schema_version;
    j[ "program" ] = program;
    j[ "domain" ] = cfg.domain;
    j[ "dedup" ] = cfg.dedup == dedup_mode::off         ? "off"
                   : cfg.dedup == dedup_mode::syntactic ? "syntactic"
                                                        : "semantic";
    j[ "strategy" ] = cfg.strategy == search_strategy::dfs ? "dfs" : "bfs";
    j[ "verdict" ] = v.k == verdict::kind::safe        ? "safe"
                     : v.k == verdict::kind::violation ? "violation"
                                                       : "unknown";
    if ( v.k == verdict::kind::unknown )
        j[ "reason" ] = v.unknown_reason;

    if ( v.viol )
    {
        nlohmann::json model = nlohmann::json::object();
        for ( size_t i = 0; i < v.viol->model.size(); ++i )
            model[ "s" + std::to_string( i ) ] = v.viol->model[ i ];
        nlohmann::json widths = nlohmann::json::array();
        for ( auto w : v.viol->model_widths )
            widths.push_back( int( w ) );
        nlohmann::json trail = nlohmann::json::array();
        for ( auto &c : v.viol->trail )
            trail.push_back( { { "site", c.site },
                               { "dir", c.direction },
                               { "arity", c.arity } } );
        j[ "violation" ] = { { "kind", v.viol->kind },
                             { "model", model },
                             { "model_widths", widths },
                             { "trail", trail },
                             { "trace", v.viol->trace },
                             { "output", v.viol->output },
                             { "replay_ok", v.viol->replay_ok } };
    }

    j[ "stats" ] = { { "states_stored", v.stats.states_stored },
                     { "solver_calls", v.stats.solver_calls },
                     { "prunes", v.stats.prunes },
                     { "dedup_hits", v.stats.dedup_hits },
                     { "paths_completed", v.stats.paths_completed },
                     { "blocked", v.stats.blocked },
                     { "wall_ms", v.stats.wall_ms },
                     { "budget_hit", v.stats.budget_hit } };
    return j;
}

// structural schema check used by tests and tooling
inline bool report_valid( const nlohmann::json &j, std::string *why = nullptr )
{
    auto fail = [ & ]( const std::string &m )
    {
        if ( why )
            *why = m;
        return false;
    };
    if ( !j.is_object() )
        return fail( "not an object" );
    if ( j.value( "schema", "" ) != report_schema_version )
        return fail( "bad schema version" );
    for ( const char *key : { "program", "domain", "dedup", "strategy", "verdict" } )
        if ( !j.contains( key ) || !j[ key ].is_string() )
            return fail( std::string( "missing field " ) + key );
    std::string verdict_s = j[ "verdict" ];
    if ( verdict_s != "safe" && verdict_s != "violation" && verdict_s != "unknown" )
        return fail( "bad verdict" );
    if ( verdict_s == "violation" )
    {
        if ( !j.contains( "violation" ) || !j[ "violation" ].is_object() )
            return fail( "violation verdict without violation object" );
        auto &v = j[ "violation" ];
        for ( const char *key : { "kind", "model", "trail" } )
            if ( !v.contains( key ) )
                return fail( std::string( "violation missing " ) + key );
    }
    if ( !j.contains( "stats" ) || !j[ "stats" ].is_object() )
        return fail( "missing stats" );
    auto &s = j[ "stats" ];
    for ( const char *key : { "states_stored", "solver_calls", "prunes", "wall_ms" } )
        if ( !s.contains( key ) || !s[ key ].is_number() )
            return fail( std::string( "stats missing " ) + key );
    return true;
}

} // namespace symtrans
