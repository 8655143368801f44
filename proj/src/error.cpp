#include "hypatk/error.hpp"

namespace hypatk {

void throw_config(const std::string& what) { throw ConfigError(what); }

void throw_data(const std::string& what) { throw DataError(what); }

}  // namespace hypatk
