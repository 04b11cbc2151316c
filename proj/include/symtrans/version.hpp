#pragma once

namespace symtrans
{

constexpr const char *tool_version = "1.0.0";

} // namespace symtrans
