#pragma once

#include <string>

namespace betamrf {

// ISO-8601 calendar helpers (proleptic Gregorian, Howard Hinnant's algorithms).
long days_from_civil(int y, unsigned m, unsigned d);
void civil_from_days(long z, int& y, unsigned& m, unsigned& d);

// "YYYY-MM-DD" <-> serial day count.
long parse_iso_date(const std::string& s);
std::string format_iso_date(long serial);
std::string add_days(const std::string& iso, long days);

}  // namespace betamrf
