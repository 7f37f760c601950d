#include "casim/lang.hpp"

namespace casim {

FieldLayout layout_of(const RuleProgram& program) {
    if (program.validated) return program.layout;
    RuleProgram copy = program;
    auto errors = validate(copy);
    if (!errors.empty()) {
        std::string msg = "invalid program:";
        for (const auto& e : errors) {
            msg += "\n  ";
            msg += e;
        }
        raise(ErrorKind::Validate, msg);
    }
    return copy.layout;
}

} // namespace casim
