#pragma once

#include <deque>
#include <istream>
#include <ostream>

#include "eap/common.hpp"

namespace eap {

// One paired-rollout record: from state s0 and uncorrected action a0, the
// reference and validation environments reached sT_ref / sT_val after T
// steps. mu is the validation environment's observable vector; source_env
// and iteration record provenance.
struct ErrorSample {
    Vec s0;
    Vec a0;
    Vec sT_val;
    Vec sT_ref;
    Vec mu;
    int source_env = -1;
    int iteration = -1;

    Vec target() const {
        require(sT_ref.size() == sT_val.size(), "error sample: state dims differ");
        Vec t(sT_ref.size());
        for (std::size_t i = 0; i < t.size(); ++i) t[i] = sT_ref[i] - sT_val[i];
        return t;
    }
};

// FIFO-bounded store of error samples.
class ErrorDataset {
public:
    explicit ErrorDataset(std::size_t capacity = 50000) : capacity_(capacity) {
        require(capacity_ > 0, "error dataset capacity must be positive");
    }

    std::size_t size() const { return samples_.size(); }
    std::size_t capacity() const { return capacity_; }
    const std::deque<ErrorSample>& samples() const { return samples_; }
    const ErrorSample& operator[](std::size_t i) const { return samples_[i]; }

    void add(ErrorSample s) {
        samples_.push_back(std::move(s));
        if (samples_.size() > capacity_) samples_.pop_front();
    }

    void save(std::ostream& out) const {
        write_u64(out, capacity_);
        write_u64(out, samples_.size());
        for (const auto& s : samples_) {
            write_vec(out, s.s0);
            write_vec(out, s.a0);
            write_vec(out, s.sT_val);
            write_vec(out, s.sT_ref);
            write_vec(out, s.mu);
            const std::int32_t src = s.source_env, it = s.iteration;
            out.write(reinterpret_cast<const char*>(&src), sizeof(src));
            out.write(reinterpret_cast<const char*>(&it), sizeof(it));
        }
    }

    void load(std::istream& in) {
        capacity_ = read_u64(in);
        const std::uint64_t n = read_u64(in);
        samples_.clear();
        for (std::uint64_t i = 0; i < n; ++i) {
            ErrorSample s;
            read_vec(in, s.s0);
            read_vec(in, s.a0);
            read_vec(in, s.sT_val);
            read_vec(in, s.sT_ref);
            read_vec(in, s.mu);
            std::int32_t src = 0, it = 0;
            in.read(reinterpret_cast<char*>(&src), sizeof(src));
            in.read(reinterpret_cast<char*>(&it), sizeof(it));
            s.source_env = src;
            s.iteration = it;
            samples_.push_back(std::move(s));
        }
        if (!in) throw RuntimeFailure("error dataset: truncated stream");
    }

    // Human-readable dump for offline inspection.
    void dump_text(std::ostream& out) const {
        out << "# eap-error-dataset v1: s0 | a0 | sT_val | sT_ref | mu | env iter\n";
        for (const auto& s : samples_) {
            auto put = [&out](const Vec& v) {
                for (double x : v) out << x << " ";
                out << "| ";
            };
            put(s.s0);
            put(s.a0);
            put(s.sT_val);
            put(s.sT_ref);
            put(s.mu);
            out << s.source_env << " " << s.iteration << "\n";
        }
    }

private:
    static void write_u64(std::ostream& out, std::uint64_t v) {
        out.write(reinterpret_cast<const char*>(&v), sizeof(v));
    }
    static std::uint64_t read_u64(std::istream& in) {
        std::uint64_t v = 0;
        in.read(reinterpret_cast<char*>(&v), sizeof(v));
        return v;
    }
    static void write_vec(std::ostream& out, const Vec& v) {
        write_u64(out, v.size());
        out.write(reinterpret_cast<const char*>(v.data()),
                  static_cast<std::streamsize>(v.size() * sizeof(double)));
    }
    static void read_vec(std::istream& in, Vec& v) {
        v.resize(read_u64(in));
        in.read(reinterpret_cast<char*>(v.data()),
                static_cast<std::streamsize>(v.size() * sizeof(double)));
    }

    std::size_t capacity_;
    std::deque<ErrorSample> samples_;
};

}  // namespace eap
