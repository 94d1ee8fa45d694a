#include "gasm/fastx.hpp"

#include <zlib.h>

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace gasm {

namespace {

bool ends_with(const std::string& s, const char* suffix) {
    std::size_t n = std::strlen(suffix);
    return s.size() >= n && s.compare(s.size() - n, n, suffix) == 0;
}

}  // namespace

struct FastxReader::Impl {
    gzFile gz = nullptr;
    std::ifstream plain;
    bool use_gz = false;
    std::size_t line_no = 0;
    std::string path;
    std::string pending;  // pushed-back line
    bool have_pending = false;
    char buf[1 << 16];

    explicit Impl(const std::string& p) : path(p) {
        use_gz = ends_with(p, ".gz");
        if (use_gz) {
            gz = gzopen(p.c_str(), "rb");
            if (!gz) throw std::runtime_error("cannot open " + p);
        } else {
            plain.open(p);
            if (!plain) throw std::runtime_error("cannot open " + p);
        }
    }

    ~Impl() {
        if (gz) gzclose(gz);
    }

    bool getline(std::string& out) {
        if (have_pending) {
            out = std::move(pending);
            have_pending = false;
            ++line_no;
            return true;
        }
        if (use_gz) {
            out.clear();
            while (true) {
                if (!gzgets(gz, buf, sizeof buf)) {
                    if (!out.empty()) { ++line_no; return true; }
                    return false;
                }
                out += buf;
                if (!out.empty() && out.back() == '\n') {
                    out.pop_back();
                    break;
                }
            }
            if (!out.empty() && out.back() == '\r') out.pop_back();
            ++line_no;
            return true;
        }
        if (!std::getline(plain, out)) return false;
        if (!out.empty() && out.back() == '\r') out.pop_back();
        ++line_no;
        return true;
    }

    void push_back(std::string line) {
        pending = std::move(line);
        have_pending = true;
        --line_no;
    }
};

FastxReader::FastxReader(const std::string& path) : impl_(new Impl(path)) {}
FastxReader::~FastxReader() = default;
FastxReader::FastxReader(FastxReader&&) noexcept = default;
FastxReader& FastxReader::operator=(FastxReader&&) noexcept = default;

std::optional<SeqRecord> FastxReader::next() {
    std::string line;
    do {
        if (!impl_->getline(line)) return std::nullopt;
    } while (line.empty());

    SeqRecord rec;
    if (line[0] == '@') {
        // FASTQ: strictly 4 lines per record
        rec.id = line.substr(1, line.find_first_of(" \t") - 1);
        if (!impl_->getline(rec.seq))
            throw ParseError("truncated FASTQ record", impl_->line_no);
        std::string plus;
        if (!impl_->getline(plus) || plus.empty() || plus[0] != '+')
            throw ParseError("missing '+' separator", impl_->line_no);
        if (!impl_->getline(rec.qual))
            throw ParseError("missing quality line", impl_->line_no);
        if (rec.qual.size() != rec.seq.size())
            throw ParseError("sequence/quality length mismatch", impl_->line_no);
        return rec;
    }
    if (line[0] == '>') {
        rec.id = line.substr(1, line.find_first_of(" \t") - 1);
        while (impl_->getline(line)) {
            if (!line.empty() && (line[0] == '>' || line[0] == '@')) {
                impl_->push_back(std::move(line));
                break;
            }
            rec.seq += line;
        }
        return rec;
    }
    throw ParseError("unexpected record header '" + line.substr(0, 1) + "'",
                     impl_->line_no);
}

std::vector<SeqRecord> read_fastx(const std::string& path) {
    FastxReader reader(path);
    std::vector<SeqRecord> out;
    while (auto rec = reader.next()) out.push_back(std::move(*rec));
    return out;
}

std::vector<ReadPair> read_pairs(const std::string& path1, const std::string& path2,
                                 int library_id, std::uint64_t first_id) {
    std::vector<ReadPair> out;
    std::uint64_t id = first_id;
    auto make_pair = [&](SeqRecord&& a, SeqRecord&& b) {
        ReadPair p;
        p.id = id++;
        p.read1 = std::move(a.seq);
        p.quals1 = std::move(a.qual);
        p.read2 = std::move(b.seq);
        p.quals2 = std::move(b.qual);
        p.library_id = library_id;
        out.push_back(std::move(p));
    };
    if (!path2.empty()) {
        FastxReader r1(path1), r2(path2);
        while (true) {
            auto a = r1.next();
            auto b = r2.next();
            if (!a && !b) break;
            if (!a || !b)
                throw std::runtime_error("paired files have different record counts");
            make_pair(std::move(*a), std::move(*b));
        }
    } else {
        FastxReader r(path1);
        while (true) {
            auto a = r.next();
            if (!a) break;
            auto b = r.next();
            if (!b) throw std::runtime_error("odd record count in interleaved input");
            make_pair(std::move(*a), std::move(*b));
        }
    }
    return out;
}

void write_fasta(const std::string& path, const std::vector<SeqRecord>& records,
                 std::size_t wrap) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    for (const auto& rec : records) {
        out << '>' << rec.id << '\n';
        for (std::size_t i = 0; i < rec.seq.size(); i += wrap)
            out << rec.seq.substr(i, wrap) << '\n';
        if (rec.seq.empty()) out << '\n';
    }
}

void write_fastq(const std::string& path, const std::vector<SeqRecord>& records) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    for (const auto& rec : records)
        out << '@' << rec.id << '\n' << rec.seq << "\n+\n" << rec.qual << '\n';
}

}  // namespace gasm
