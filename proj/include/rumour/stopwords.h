#pragma once

#include <set>
#include <string>

namespace rumour {

using StopwordSet = std::set<std::string>;

// A compact English stopword list (lowercase).
const StopwordSet& default_stopwords();

// One word per line; blank lines ignored; words lowercased.
StopwordSet load_stopwords(const std::string& path);

}  // namespace rumour
