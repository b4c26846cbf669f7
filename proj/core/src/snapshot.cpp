#include "kwlab/snapshot.hpp"

#include <cstdio>
#include <cstring>

namespace kwlab {

namespace {
constexpr char kMagic[4] = {'K', 'W', 'F', '1'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::vector<unsigned char>& buf, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf.push_back((v >> (8 * i)) & 0xff);
}
void put_f64(std::vector<unsigned char>& buf, double d) {
    std::uint64_t v;
    std::memcpy(&v, &d, 8);
    for (int i = 0; i < 8; ++i) buf.push_back((v >> (8 * i)) & 0xff);
}

struct Reader {
    const unsigned char* p;
    const unsigned char* end;
    std::uint32_t u32() {
        require(end - p >= 4, "snapshot truncated");
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= std::uint32_t(p[i]) << (8 * i);
        p += 4;
        return v;
    }
    double f64() {
        require(end - p >= 8, "snapshot truncated");
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= std::uint64_t(p[i]) << (8 * i);
        p += 8;
        double d;
        std::memcpy(&d, &v, 8);
        return d;
    }
};

std::uint32_t group_code(const GaugeGroup& g) {
    switch (g.kind) {
        case GaugeGroup::Kind::U1: return 0;
        case GaugeGroup::Kind::SU2: return 1;
        default: return 2;
    }
}
std::uint32_t herm_code(Herm h) {
    switch (h) {
        case Herm::anti: return 0;
        case Herm::herm: return 1;
        default: return 2;
    }
}
Herm herm_from(std::uint32_t c) {
    require(c <= 2, "snapshot: bad hermiticity code");
    return c == 0 ? Herm::anti : (c == 1 ? Herm::herm : Herm::general);
}
}  // namespace

const FormField& FieldSnapshot::at(const std::string& name) const {
    for (const auto& f : fields)
        if (f.name == name) return f.field;
    throw PreconditionError("snapshot has no field named " + name);
}

void save_snapshot(const FieldSnapshot& snap, const std::string& path) {
    std::vector<unsigned char> buf;
    buf.insert(buf.end(), kMagic, kMagic + 4);
    put_u32(buf, kVersion);
    put_u32(buf, group_code(snap.group));
    put_u32(buf, std::uint32_t(snap.group.rank));
    put_u32(buf, std::uint32_t(snap.lat.dim));
    put_u32(buf, std::uint32_t(snap.lat.n));
    put_u32(buf, std::uint32_t(snap.fields.size()));
    for (const auto& nf : snap.fields) {
        put_u32(buf, std::uint32_t(nf.name.size()));
        buf.insert(buf.end(), nf.name.begin(), nf.name.end());
        put_u32(buf, std::uint32_t(nf.field.degree));
        put_u32(buf, herm_code(nf.field.cls));
    }
    for (const auto& nf : snap.fields) {
        const FormField& f = nf.field;
        const int rr = f.r * f.r;
        for (int c = 0; c < f.comps(); ++c)
            for (long long s = 0; s < f.sites(); ++s) {
                const cplx* p = f.at(c, s);
                for (int e = 0; e < rr; ++e) {
                    put_f64(buf, p[e].real());
                    put_f64(buf, p[e].imag());
                }
            }
    }
    // atomic write: temp then rename
    std::string tmp = path + ".tmp";
    FILE* fp = std::fopen(tmp.c_str(), "wb");
    if (!fp) throw RuntimeError("cannot open " + tmp + " for writing");
    std::size_t w = std::fwrite(buf.data(), 1, buf.size(), fp);
    std::fclose(fp);
    if (w != buf.size()) throw RuntimeError("short write to " + tmp);
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw RuntimeError("cannot rename " + tmp + " to " + path);
}

FieldSnapshot load_snapshot(const std::string& path) {
    FILE* fp = std::fopen(path.c_str(), "rb");
    if (!fp) throw RuntimeError("cannot open " + path);
    std::vector<unsigned char> buf;
    unsigned char chunk[65536];
    std::size_t got;
    while ((got = std::fread(chunk, 1, sizeof chunk, fp)) > 0)
        buf.insert(buf.end(), chunk, chunk + got);
    std::fclose(fp);
    require(buf.size() >= 4 && std::memcmp(buf.data(), kMagic, 4) == 0,
            "snapshot: bad magic");
    Reader r{buf.data() + 4, buf.data() + buf.size()};
    std::uint32_t version = r.u32();
    require(version == kVersion, "snapshot: version mismatch rejected");
    std::uint32_t gcode = r.u32();
    std::uint32_t rank = r.u32();
    std::uint32_t dim = r.u32();
    std::uint32_t n = r.u32();
    std::uint32_t nfields = r.u32();
    FieldSnapshot snap;
    switch (gcode) {
        case 0: snap.group = GaugeGroup::u1(); break;
        case 1: snap.group = GaugeGroup::su2(); break;
        case 2: snap.group = GaugeGroup::ur(int(rank)); break;
        default: throw RuntimeError("snapshot: bad group code");
    }
    require(int(rank) == snap.group.rank, "snapshot: rank mismatch");
    snap.lat = TorusLattice::make(int(dim), int(n));
    struct Meta {
        std::string name;
        int degree;
        Herm cls;
    };
    std::vector<Meta> metas;
    for (std::uint32_t i = 0; i < nfields; ++i) {
        std::uint32_t len = r.u32();
        require(r.end - r.p >= long(len), "snapshot truncated");
        std::string name(reinterpret_cast<const char*>(r.p), len);
        r.p += len;
        std::uint32_t degree = r.u32();
        Herm cls = herm_from(r.u32());
        metas.push_back({name, int(degree), cls});
    }
    for (const auto& m : metas) {
        NamedField nf;
        nf.name = m.name;
        nf.field = FormField(snap.lat, m.degree, snap.group.rank, m.cls);
        const int rr = nf.field.r * nf.field.r;
        for (int c = 0; c < nf.field.comps(); ++c)
            for (long long s = 0; s < nf.field.sites(); ++s) {
                cplx* p = nf.field.at(c, s);
                for (int e = 0; e < rr; ++e) {
                    double re = r.f64();
                    double im = r.f64();
                    p[e] = cplx(re, im);
                }
            }
        snap.fields.push_back(std::move(nf));
    }
    require(r.p == r.end, "snapshot: trailing bytes");
    return snap;
}

}  // namespace kwlab
