#include "simrel/interface.hpp"

#include <array>
#include <sstream>

namespace simrel {

std::string to_string(Var v) {
    switch (v) {
        case Var::x1: return "x1";
        case Var::x1_next: return "x1+";
        case Var::z1: return "z1";
        case Var::z1_next: return "z1+";
        case Var::u1: return "u1";
        case Var::u2: return "u2";
    }
    return "?";
}

Signature signature(RelationType t) {
    using V = Var;
    switch (t) {
        case RelationType::asr: return {t, {V::z1, V::u2, V::x1}, {V::z1, V::u2, V::x1_next}};
        case RelationType::asrb: return {t, {V::z1, V::u2, V::x1}, {V::z1, V::u2, V::x1, V::u1}};
        case RelationType::asrbb: return {t, {V::z1, V::u2, V::x1, V::z1_next}, {V::z1, V::u2}};
        case RelationType::mcr: return {t, {V::z1, V::u2, V::x1}, {V::x1_next}};
        case RelationType::frr: return {t, {V::u2}, {V::x1_next}};
    }
    throw UsageError("unknown relation type");
}

// SetMap ---------------------------------------------------------------------

namespace {

constexpr std::size_t kMaxTable = std::size_t{1} << 26;

std::size_t product_of(const std::vector<std::size_t>& dims) {
    std::size_t n = 1;
    for (auto d : dims) {
        if (d != 0 && n > kMaxTable / d) throw UsageError("set-valued map domain too large to tabulate");
        n *= d;
    }
    return n;
}

}  // namespace

SetMap SetMap::table(std::vector<std::size_t> dims) {
    SetMap m;
    m.table_.resize(product_of(dims));
    m.dims_ = std::move(dims);
    return m;
}

SetMap SetMap::callable(std::vector<std::size_t> dims, Fn fn) {
    if (!fn) throw UsageError("empty callable");
    SetMap m;
    m.dims_ = std::move(dims);
    m.fn_ = std::move(fn);
    return m;
}

std::size_t SetMap::domain_size() const {
    std::size_t n = 1;
    for (auto d : dims_) n *= d;
    return n;
}

std::size_t SetMap::flat_index(std::span<const Index> args) const {
    if (args.size() != dims_.size())
        throw UsageError("set-valued map expects " + std::to_string(dims_.size()) + " arguments, got " +
                         std::to_string(args.size()));
    std::size_t flat = 0;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] >= dims_[i]) throw UsageError("set-valued map argument out of range");
        flat = flat * dims_[i] + args[i];
    }
    return flat;
}

IndexSet SetMap::operator()(std::span<const Index> args) const {
    const auto flat = flat_index(args);
    if (fn_) return make_set(fn_(args));
    return table_[flat];
}

void SetMap::set(std::span<const Index> args, IndexSet value) {
    if (fn_) throw UsageError("cannot assign into a callable map");
    normalize(value);
    table_[flat_index(args)] = std::move(value);
}

// Canonical interface --------------------------------------------------------

namespace {

std::vector<std::size_t> dims_of(const std::vector<Var>& vars, std::size_t nx1, std::size_t nz, std::size_t nu1,
                                 std::size_t nu2) {
    std::vector<std::size_t> d;
    for (auto v : vars) {
        switch (v) {
            case Var::x1:
            case Var::x1_next: d.push_back(nx1); break;
            case Var::z1:
            case Var::z1_next: d.push_back(nz); break;
            case Var::u1: d.push_back(nu1); break;
            case Var::u2: d.push_back(nu2); break;
        }
    }
    return d;
}

/// Calls fn(args) for every point of a product domain, row-major.
template <class Fn>
void for_each_point(const std::vector<std::size_t>& dims, Fn&& fn) {
    for (auto d : dims)
        if (d == 0) return;
    std::vector<Index> args(dims.size(), 0);
    while (true) {
        fn(std::span<const Index>(args));
        std::size_t i = dims.size();
        while (i > 0) {
            --i;
            if (++args[i] < dims[i]) break;
            args[i] = 0;
            if (i == 0) return;
        }
        if (dims.empty()) return;
    }
}

bool maps_into(const FiniteSystem& s1, const BinaryRelation& r, Index x1, Index u1, Index x2p) {
    for (Index xp : s1.post(x1, u1))
        if (!r.contains(xp, x2p)) return false;
    return true;
}

}  // namespace

InterfaceSpec canonical_interface(RelationType t, const FiniteSystem& s1, const FiniteSystem& s2,
                                  const BinaryRelation& r) {
    auto rep = check_relation(t, s1, s2, r);
    if (!rep.holds) throw RelationNotSatisfied(std::move(rep));

    const auto sig = signature(t);
    const std::size_t nx1 = s1.num_states(), nz = s2.num_states(), nu1 = s1.num_inputs(), nu2 = s2.num_inputs();

    InterfaceSpec iface;
    iface.type = t;
    iface.z_labels = s2.states();
    iface.u2_labels = s2.inputs();
    iface.rt = lift_relation(r);
    iface.h1 = SetMap::table(dims_of(sig.nu1, nx1, nz, nu1, nu2));
    iface.h2 = SetMap::table(dims_of(sig.nu2, nx1, nz, nu1, nu2));

    const auto ext = extended_relation(t, s1, s2, r);
    for_each_point(iface.h1.dims(), [&](std::span<const Index> a) { iface.h1.set(a, interface_input_map(ext, a)); });

    switch (t) {
        case RelationType::asr:
            for_each_point(iface.h2.dims(), [&](std::span<const Index> a) {
                iface.h2.set(a, set_intersection(s2.post(a[0], a[1]), r.image(a[2])));
            });
            break;
        case RelationType::asrb:
            for_each_point(iface.h2.dims(), [&](std::span<const Index> a) {
                IndexSet out;
                for (Index x2p : s2.post(a[0], a[1]))
                    if (maps_into(s1, r, a[2], a[3], x2p)) out.push_back(x2p);
                iface.h2.set(a, std::move(out));
            });
            break;
        case RelationType::asrbb:
            for_each_point(iface.h2.dims(), [&](std::span<const Index> a) {
                IndexSet out;
                for (Index x2p : s2.post(a[0], a[1])) {
                    bool all = true;
                    for (Index x1 : r.preimage(a[0])) {
                        bool any = false;
                        for (Index u1 : available_inputs(s1, x1)) {
                            if (maps_into(s1, r, x1, u1, x2p)) {
                                any = true;
                                break;
                            }
                        }
                        if (!any) {
                            all = false;
                            break;
                        }
                    }
                    if (all) out.push_back(x2p);
                }
                iface.h2.set(a, std::move(out));
            });
            break;
        case RelationType::mcr:
        case RelationType::frr:
            for_each_point(iface.h2.dims(), [&](std::span<const Index> a) { iface.h2.set(a, r.image(a[0])); });
            break;
    }
    return iface;
}

// Chain evaluation -----------------------------------------------------------

std::vector<ChainStep> interface_chain(const InterfaceSpec& iface, const FiniteSystem& s1, Index x1, Index z1,
                                       Index u2) {
    if (x1 >= s1.num_states() || z1 >= iface.nz() || u2 >= iface.u2_labels.size())
        throw UsageError("interface chain argument out of range");
    const auto sig = signature(iface.type);
    enum Stage { input, step, memory };
    std::array<Stage, 3> order{input, step, memory};
    if (iface.type == RelationType::asrb) order = {input, memory, step};
    if (iface.type == RelationType::asrbb) order = {memory, input, step};

    std::array<Index, 6> vals{};
    vals[static_cast<int>(Var::x1)] = x1;
    vals[static_cast<int>(Var::z1)] = z1;
    vals[static_cast<int>(Var::u2)] = u2;
    auto args = [&](const std::vector<Var>& vars) {
        std::vector<Index> a;
        a.reserve(vars.size());
        for (auto v : vars) a.push_back(vals[static_cast<int>(v)]);
        return a;
    };

    std::vector<ChainStep> out;
    std::function<void(std::size_t)> go = [&](std::size_t i) {
        if (i == order.size()) {
            out.push_back({vals[static_cast<int>(Var::u1)], vals[static_cast<int>(Var::x1_next)],
                           vals[static_cast<int>(Var::z1_next)]});
            return;
        }
        switch (order[i]) {
            case input:
                for (Index u1 : iface.h1(args(sig.nu1))) {
                    if (u1 >= s1.num_inputs()) throw UsageError("h1 returned an input out of range");
                    vals[static_cast<int>(Var::u1)] = u1;
                    go(i + 1);
                }
                break;
            case step:
                for (Index xn : s1.post(x1, vals[static_cast<int>(Var::u1)])) {
                    vals[static_cast<int>(Var::x1_next)] = xn;
                    go(i + 1);
                }
                break;
            case memory:
                for (Index zn : iface.h2(args(sig.nu2))) {
                    if (zn >= iface.nz()) throw UsageError("h2 returned a memory value out of range");
                    vals[static_cast<int>(Var::z1_next)] = zn;
                    go(i + 1);
                }
                break;
        }
    };
    go(0);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

CheckReport validate_interface(const InterfaceSpec& iface, const FiniteSystem& s1, const FiniteSystem& s2) {
    if (iface.rt.n1() != s1.num_states() * iface.nz() || iface.rt.n2() != s2.num_states())
        throw UsageError("interface relation dimensions do not match the systems");
    if (!(iface.u2_labels == s2.inputs())) throw UsageError("interface inputs differ from the abstraction inputs");

    auto describe = [&](Index x1, Index z1, Index x2, Index u2) {
        std::ostringstream os;
        os << "x1=" << s1.states()[x1] << ", z1=" << iface.z_labels[z1] << ", x2=" << s2.states()[x2]
           << ", u2=" << s2.inputs()[u2];
        return os.str();
    };

    CheckReport rep;
    for (auto [l, x2] : iface.rt.pairs()) {
        const Index x1 = l / iface.nz(), z1 = l % iface.nz();
        for (Index u2 : available_inputs(s2, x2)) {
            const auto chain = interface_chain(iface, s1, x1, z1, u2);
            if (chain.empty()) {
                rep.holds = false;
                rep.counterexample = std::vector<Index>{x1, z1, x2, u2};
                rep.message = "interface chain has no outcome at " + describe(x1, z1, x2, u2);
                return rep;
            }
            const auto& f2 = s2.post(x2, u2);
            for (const auto& c : chain) {
                const auto& img = iface.rt.image(iface.lifted(c.x1_next, c.z1_next));
                if (img.empty() || !is_subset(img, f2)) {
                    rep.holds = false;
                    rep.counterexample = std::vector<Index>{x1, z1, x2, u2, c.u1, c.x1_next, c.z1_next};
                    rep.message = "interface chain leaves F2 at " + describe(x1, z1, x2, u2) +
                                  " via u1=" + s1.inputs()[c.u1] + ", x1+=" + s1.states()[c.x1_next] +
                                  ", z1+=" + iface.z_labels[c.z1_next];
                    return rep;
                }
            }
            if (!rep.witness) rep.witness = std::vector<Index>{x1, z1, x2, u2};
        }
    }
    if (!rep.witness) {
        rep.witness = std::vector<Index>{};
        rep.message = "interface valid (vacuously)";
    } else {
        rep.message = "interface valid";
    }
    return rep;
}

FiniteSystem augment(const FiniteSystem& s1, const InterfaceSpec& iface) {
    FiniteSystem aug(product(s1.states(), iface.z_labels), iface.u2_labels);
    for (Index x1 = 0; x1 < s1.num_states(); ++x1) {
        for (Index z1 = 0; z1 < iface.nz(); ++z1) {
            for (Index u2 = 0; u2 < iface.u2_labels.size(); ++u2) {
                IndexSet succ;
                for (const auto& c : interface_chain(iface, s1, x1, z1, u2))
                    succ.push_back(iface.lifted(c.x1_next, c.z1_next));
                aug.set_post(iface.lifted(x1, z1), u2, std::move(succ));
            }
        }
    }
    return aug;
}

bool check_common_quantization(const BinaryRelation& rt, std::size_t nz) {
    if (nz == 0) return true;
    if (rt.n1() % nz != 0) throw UsageError("lifted relation size is not a multiple of |Z1|");
    const std::size_t nx1 = rt.n1() / nz;
    for (Index z1 = 0; z1 < nz; ++z1) {
        std::vector<const IndexSet*> images;
        for (Index x1 = 0; x1 < nx1; ++x1) {
            const auto& img = rt.image(x1 * nz + z1);
            if (!img.empty()) images.push_back(&img);
        }
        for (std::size_t i = 0; i < images.size(); ++i)
            for (std::size_t j = i + 1; j < images.size(); ++j)
                if (!intersects(*images[i], *images[j])) return false;
    }
    return true;
}

BinaryRelation flatten_relation(const BinaryRelation& rt, std::size_t nz) {
    if (nz == 0 || rt.n1() % nz != 0) throw UsageError("lifted relation size is not a multiple of |Z1|");
    BinaryRelation r(rt.n1() / nz, rt.n2());
    for (auto [l, x2] : rt.pairs()) r.add(l / nz, x2);
    return r;
}

BinaryRelation lift_relation(const BinaryRelation& r) {
    BinaryRelation rt(r.n1() * r.n2(), r.n2());
    for (auto [x1, x2] : r.pairs()) rt.add(x1 * r.n2() + x2, x2);
    return rt;
}

CheckReport interface_frr_equivalence(const InterfaceSpec& iface, const FiniteSystem& s1, const FiniteSystem& s2) {
    auto direct = validate_interface(iface, s1, s2);
    const auto aug = augment(s1, iface);
    const auto frr = check_relation(RelationType::frr, aug, s2, iface.rt);
    if (direct.holds != frr.holds)
        throw InvariantViolation("interface validation (" + direct.message + ") disagrees with FRR check (" +
                                 frr.message + ")");
    return direct;
}

}  // namespace simrel
