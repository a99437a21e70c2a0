#include "floquet/rational.hpp"

#include <stdexcept>

namespace floquet {

BigRational rational_from_string(const std::string& s) {
    mpq_class r;
    if (mpq_set_str(r.get_mpq_t(), s.c_str(), 10) != 0)
        throw std::invalid_argument("rational_from_string: cannot parse '" + s + "'");
    if (r.get_den() == 0)
        throw std::invalid_argument("rational_from_string: zero denominator in '" + s + "'");
    r.canonicalize();
    return r;
}

std::string rational_to_string(const BigRational& r) {
    return r.get_num().get_str() + "/" + r.get_den().get_str();
}

}  // namespace floquet
