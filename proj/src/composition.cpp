#include "simrel/system.hpp"

#include <sstream>

namespace simrel {

namespace {

std::vector<Index> require_subset(const LabelSet& from, const LabelSet& to, const std::string& what) {
    auto m = match_labels(from, to);
    for (Index i = 0; i < m.size(); ++i) {
        if (m[i] == kNoIndex)
            throw CompositionError("outputs", what + " label '" + from[i] + "' is not an input label");
    }
    return m;
}

}  // namespace

GeneralSystem serial_compose(const GeneralSystem& first, const GeneralSystem& second) {
    const auto y1_to_u2 = require_subset(first.outputs(), second.inputs(), "output");
    const std::size_t n2 = second.states().size();
    const std::size_t w2 = second.internal().size();

    GeneralSystem out(product(first.states(), second.states()), first.inputs(),
                      product(first.internal(), second.internal()), second.outputs());

    for (Index x1 = 0; x1 < first.states().size(); ++x1) {
        for (Index x2 = 0; x2 < n2; ++x2) {
            const Index x = pair_index(x1, x2, n2);
            for (Index v1 = 0; v1 < first.internal().size(); ++v1) {
                const auto& s1 = first.next(x1, v1);
                for (Index v2 = 0; v2 < w2; ++v2) {
                    const auto& s2 = second.next(x2, v2);
                    IndexSet succ;
                    succ.reserve(s1.size() * s2.size());
                    for (Index a : s1)
                        for (Index b : s2) succ.push_back(pair_index(a, b, n2));
                    out.set_next(x, pair_index(v1, v2, w2), std::move(succ));
                }
            }
            for (Index u1 = 0; u1 < first.inputs().size(); ++u1) {
                OutputSet h;
                for (const auto& c1 : first.output(x1, u1))
                    for (const auto& c2 : second.output(x2, y1_to_u2[c1.y]))
                        h.push_back({c2.y, pair_index(c1.v, c2.v, w2)});
                out.set_output(x, u1, std::move(h));
            }
        }
    }
    return out;
}

ComposabilityReport feedback_composable(const GeneralSystem& controller, const GeneralSystem& plant) {
    ComposabilityReport rep;
    auto fail = [&](std::string clause, std::string detail) {
        rep.ok = false;
        rep.clause = std::move(clause);
        rep.detail = std::move(detail);
        return rep;
    };

    const auto y2_to_u1 = match_labels(plant.outputs(), controller.inputs());
    for (Index i = 0; i < y2_to_u1.size(); ++i)
        if (y2_to_u1[i] == kNoIndex)
            return fail("outputs", "plant output '" + plant.outputs()[i] + "' is not a controller input");
    const auto y1_to_u2 = match_labels(controller.outputs(), plant.inputs());
    for (Index i = 0; i < y1_to_u2.size(); ++i)
        if (y1_to_u2[i] == kNoIndex)
            return fail("outputs", "controller output '" + controller.outputs()[i] + "' is not a plant input");

    if (!(plant.internal() == plant.inputs()))
        return fail("condition (i)", "plant internal variables differ from its inputs");
    for (Index x2 = 0; x2 < plant.states().size(); ++x2) {
        IndexSet reference;
        for (Index u2 = 0; u2 < plant.inputs().size(); ++u2) {
            IndexSet ys;
            for (const auto& c : plant.output(x2, u2)) {
                if (c.v != u2)
                    return fail("condition (i)", "H(" + plant.states()[x2] + ", " + plant.inputs()[u2] +
                                                     ") carries internal value '" + plant.internal()[c.v] + "'");
                ys.push_back(c.y);
            }
            if (u2 == 0) {
                reference = std::move(ys);
            } else if (ys != reference) {
                return fail("condition (i)", "output of plant state '" + plant.states()[x2] +
                                                 "' depends on input '" + plant.inputs()[u2] + "'");
            }
        }
    }

    for (Index x1 = 0; x1 < controller.states().size(); ++x1) {
        for (Index x2 = 0; x2 < plant.states().size(); ++x2) {
            for (Index y2 = 0; y2 < plant.outputs().size(); ++y2) {
                for (const auto& c1 : controller.output(x1, y2_to_u1[y2])) {
                    for (const auto& c2 : plant.output(x2, y1_to_u2[c1.y])) {
                        if (c2.y != y2) continue;
                        if (plant.next(x2, c2.v).empty() && !controller.next(x1, c1.v).empty()) {
                            std::ostringstream os;
                            os << "plant blocks at (" << plant.states()[x2] << ", " << plant.internal()[c2.v]
                               << ") while controller state '" << controller.states()[x1] << "' moves";
                            return fail("condition (ii)", os.str());
                        }
                    }
                }
            }
        }
    }
    return rep;
}

GeneralSystem feedback_product(const GeneralSystem& controller, const GeneralSystem& plant) {
    const auto y2_to_u1 = require_subset(plant.outputs(), controller.inputs(), "plant output");
    const auto y1_to_u2 = require_subset(controller.outputs(), plant.inputs(), "controller output");
    const std::size_t n2 = plant.states().size();
    const std::size_t w2 = plant.internal().size();
    const std::size_t o2 = plant.outputs().size();

    GeneralSystem out(product(controller.states(), plant.states()), LabelSet::singleton(),
                      product(controller.internal(), plant.internal()),
                      product(controller.outputs(), plant.outputs()));

    for (Index x1 = 0; x1 < controller.states().size(); ++x1) {
        for (Index x2 = 0; x2 < n2; ++x2) {
            const Index x = pair_index(x1, x2, n2);
            for (Index v1 = 0; v1 < controller.internal().size(); ++v1) {
                const auto& s1 = controller.next(x1, v1);
                for (Index v2 = 0; v2 < w2; ++v2) {
                    const auto& s2 = plant.next(x2, v2);
                    IndexSet succ;
                    succ.reserve(s1.size() * s2.size());
                    for (Index a : s1)
                        for (Index b : s2) succ.push_back(pair_index(a, b, n2));
                    out.set_next(x, pair_index(v1, v2, w2), std::move(succ));
                }
            }
            OutputSet h;
            for (Index y2 = 0; y2 < o2; ++y2) {
                for (const auto& c1 : controller.output(x1, y2_to_u1[y2])) {
                    for (const auto& c2 : plant.output(x2, y1_to_u2[c1.y])) {
                        if (c2.y == y2) h.push_back({pair_index(c1.y, y2, o2), pair_index(c1.v, c2.v, w2)});
                    }
                }
            }
            out.set_output(x, 0, std::move(h));
        }
    }
    return out;
}

GeneralSystem feedback_compose(const GeneralSystem& controller, const GeneralSystem& plant) {
    auto rep = feedback_composable(controller, plant);
    if (!rep) throw CompositionError(rep.clause, rep.detail);
    return feedback_product(controller, plant);
}

}  // namespace simrel
