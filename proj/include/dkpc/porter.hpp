#ifndef DKPC_PORTER_HPP
#define DKPC_PORTER_HPP

#include <string>

namespace dkpc {

// Porter stemming algorithm (the classic reference version, including its
// two documented departures: bli->ble and logi->log in step 2).
// Expects a lowercase word; tokens containing non a-z characters are
// returned unchanged, as are words of length <= 2.
std::string porter_stem(const std::string& word);

}  // namespace dkpc

#endif  // DKPC_PORTER_HPP
