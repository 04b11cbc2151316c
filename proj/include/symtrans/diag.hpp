#pragma once

#include <sstream>
#include <string>
#include <vector>

namespace symtrans
{

struct diagnostic
{
    uint32_t line = 0, col = 0;
    std::string message;

    std::string str() const
    {
        std::ostringstream os;
        if ( line )
        {
            os << "line " << line;
            if ( col )
                os << ":" << col;
            os << ": ";
        }
        os << message;
        return os.str();
    }
};

using diagnostics = std::vector< diagnostic >;

inline std::string join_diags( const diagnostics &ds )
{
    std::string out;
    for ( auto &d : ds )
    {
        out += d.str();
        out += '\n';
    }
    return out;
}

} // namespace symtrans
