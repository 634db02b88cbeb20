#include <catch2/catch_amalgamated.hpp>

#include <array>

#include "stash_shuffle/distribute.hpp"
#include "stash_shuffle/shuffle.hpp"
#include "test_util.hpp"

using namespace stashshuffle;

namespace {

Keychain make_keys(std::uint64_t seed = 7) { return Keychain::derive(RngSuite(seed)); }

// Decrypt one mid chunk (j, source) back to records.
std::vector<Record> read_chunk(UntrustedStore& store, const ShuffleParams& p, Keychain& keys,
                               std::uint64_t j, std::uint64_t source) {
    const std::uint64_t slots = source == p.bucket_count ? p.drain_quota : p.chunk_cap;
    std::vector<Record> out;
    for (std::uint64_t i = 0; i < slots; ++i)
        out.push_back(keys.mid.decrypt(store.raw(ArrayId::Mid)[mid_idx(p, j, i, source)], 8));
    return out;
}

}  // namespace

TEST_CASE("shuffle_to_buckets: single bucket sends everything to zero") {
    StreamRng rng(1);
    for (const AssignMode mode : {AssignMode::Separators, AssignMode::Multinomial}) {
        const TargetAssignment t = shuffle_to_buckets(1, 6, rng, mode);
        for (const auto v : t.targets) CHECK(v == 0);
    }
}

TEST_CASE("shuffle_to_buckets: B=2, D=1 separators is a fair coin") {
    StreamRng rng(2);
    std::array<std::uint64_t, 2> counts{0, 0};
    const std::uint64_t trials = 40'000;
    for (std::uint64_t t = 0; t < trials; ++t)
        ++counts[shuffle_to_buckets(2, 1, rng, AssignMode::Separators).targets[0]];
    // 2 arrangements of one item and one separator; 5 sigma at p = 1/2
    const double sd = std::sqrt(trials * 0.25);
    CHECK(std::abs(static_cast<double>(counts[0]) - trials / 2.0) < 5 * sd);
}

TEST_CASE("shuffle_to_buckets: B=2, D=2 separators count vector is uniform over 3 outcomes") {
    StreamRng rng(3);
    std::array<std::uint64_t, 3> counts{};  // items landing in bucket 0
    const std::uint64_t trials = 60'000;
    for (std::uint64_t t = 0; t < trials; ++t) {
        const TargetAssignment a = shuffle_to_buckets(2, 2, rng, AssignMode::Separators);
        ++counts[(a.targets[0] == 0) + (a.targets[1] == 0)];
    }
    const double expect = trials / 3.0;
    const double sd = std::sqrt(trials * (1.0 / 3) * (2.0 / 3));
    for (const auto c : counts)
        CHECK(std::abs(static_cast<double>(c) - expect) < 5 * sd);
}

TEST_CASE("distribute_bucket hand-traced: D=4, B=2, C=2, targets [0,0,0,1]") {
    const ShuffleParams p = derive_params_with_cap(8, 2, 2, 8, 2, 8);
    Keychain keys = make_keys();
    UntrustedStore store =
        UntrustedStore::for_params(p, encrypt_input(testutil::index_payloads(8), p, 8, keys));
    Stash stash(p.bucket_count, p.stash_capacity);
    const TargetAssignment targets{{0, 0, 0, 1}};

    distribute_bucket_with_targets(stash, 0, targets, store, p, 8, keys);

    // third item (tag 2) overflowed chunk 0 into stash queue 0
    CHECK(stash.total() == 1);
    CHECK(stash.queue_size(0) == 1);
    const auto chunk0 = read_chunk(store, p, keys, 0, 0);
    const auto chunk1 = read_chunk(store, p, keys, 1, 0);
    REQUIRE(chunk0.size() == 2);
    REQUIRE(chunk1.size() == 2);
    CHECK((chunk0[0].tag == 0 && chunk0[1].tag == 1));
    CHECK_FALSE(chunk0[0].dummy);
    CHECK((chunk1[0].tag == 3 && !chunk1[0].dummy));
    CHECK(chunk1[1].dummy);  // padded to exactly C

    // the writes for this bucket: exactly B*C mid ciphertexts after D reads
    std::uint64_t mid_writes = 0;
    for (const auto& e : store.trace())
        if (e.array == ArrayId::Mid && e.op == AccessOp::Write) ++mid_writes;
    CHECK(mid_writes == p.bucket_count * p.chunk_cap);
}

TEST_CASE("stashed items take chunk slots before fresh items, FIFO") {
    const ShuffleParams p = derive_params_with_cap(8, 2, 3, 8, 2, 8);  // C = 3
    Keychain keys = make_keys();
    UntrustedStore store =
        UntrustedStore::for_params(p, encrypt_input(testutil::index_payloads(8), p, 8, keys));
    Stash stash(p.bucket_count, p.stash_capacity);
    stash.push(0, Record::real(100, Payload{9, 0, 0, 0, 0, 0, 0, 0}));

    // bucket 1 sends one fresh item to chunk 0: the stashed item goes first
    const TargetAssignment targets{{0, 1, 1, 1}};
    distribute_bucket_with_targets(stash, 1, targets, store, p, 8, keys);
    const auto chunk0 = read_chunk(store, p, keys, 0, 1);
    CHECK(chunk0[0].tag == 100);  // stashed first
    CHECK(chunk0[1].tag == 4);    // then the fresh item (tag = 1*D + 0)
    CHECK(chunk0[2].dummy);       // padded up to C
    CHECK(stash.total() == 0);
}

TEST_CASE("stash overflow fails with the offending bucket and target") {
    // S = 2 and a cap-3 chunk, so the third stashed item cannot fit
    const ShuffleParams p = derive_params_with_cap(12, 2, 3, 2, 2, 12);
    Keychain keys = make_keys();
    UntrustedStore store =
        UntrustedStore::for_params(p, encrypt_input(testutil::index_payloads(12), p, 8, keys));
    Stash stash(p.bucket_count, p.stash_capacity);
    const TargetAssignment targets{{0, 0, 0, 0, 0, 0}};  // six items into one chunk
    try {
        distribute_bucket_with_targets(stash, 0, targets, store, p, 8, keys);
        FAIL("expected StashOverflow");
    } catch (const ShuffleFailure& f) {
        CHECK(f.kind() == FailureKind::StashOverflow);
        CHECK(f.bucket() == 0);
        CHECK(f.target() == 0);
    }
}

TEST_CASE("drain_stash writes exactly K per bucket, reals first then dummies") {
    const ShuffleParams p = derive_params_with_cap(20, 2, 5, 10, 2, 20);  // K = 5
    Keychain keys = make_keys();
    UntrustedStore store =
        UntrustedStore::for_params(p, encrypt_input(testutil::index_payloads(20), p, 8, keys));

    SECTION("empty stash drains all dummies") {
        Stash stash(p.bucket_count, p.stash_capacity);
        drain_stash(stash, store, p, 8, keys);
        std::uint64_t writes = 0, dummies = 0;
        for (std::uint64_t j = 0; j < p.bucket_count; ++j) {
            for (const Record& r : read_chunk(store, p, keys, j, p.bucket_count)) {
                ++writes;
                dummies += r.dummy;
            }
        }
        CHECK(writes == p.bucket_count * p.drain_quota);
        CHECK(dummies == writes);
    }

    SECTION("two stashed items get three dummy paddings") {
        Stash stash(p.bucket_count, p.stash_capacity);
        stash.push(0, Record::real(11, Payload(8, 1)));
        stash.push(0, Record::real(12, Payload(8, 2)));
        drain_stash(stash, store, p, 8, keys);
        const auto chunk = read_chunk(store, p, keys, 0, p.bucket_count);
        CHECK(chunk[0].tag == 11);
        CHECK(chunk[1].tag == 12);
        CHECK((chunk[2].dummy && chunk[3].dummy && chunk[4].dummy));
    }

    SECTION("a queue beyond the quota cannot drain") {
        Stash stash(p.bucket_count, p.stash_capacity);
        for (int i = 0; i < 6; ++i) stash.push(1, Record::real(i, Payload(8, 0)));
        try {
            drain_stash(stash, store, p, 8, keys);
            FAIL("expected DrainFailure");
        } catch (const ShuffleFailure& f) {
            CHECK(f.kind() == FailureKind::DrainFailure);
            CHECK(f.bucket() == 1);
        }
    }
}

TEST_CASE("single-bucket distribution never touches the stash") {
    const ShuffleParams p = derive_params(6, 1, 1.0, 6, 1, 6);
    Keychain keys = make_keys();
    UntrustedStore store =
        UntrustedStore::for_params(p, encrypt_input(testutil::index_payloads(6), p, 8, keys));
    Stash stash(p.bucket_count, p.stash_capacity);
    RngSuite rngs(3);
    distribute_bucket(stash, 0, store, p, 8, keys, rngs, AssignMode::Separators);
    CHECK(stash.total() == 0);
    const auto chunk = read_chunk(store, p, keys, 0, 0);
    std::uint64_t reals = 0;
    for (const auto& r : chunk) reals += !r.dummy;
    CHECK(reals == 6);
}

TEST_CASE("distribution write shape is fixed across inputs and seeds") {
    const ShuffleParams p = derive_params_with_cap(24, 3, 4, 9, 2, 24);
    for (const std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
        Keychain keys = Keychain::derive(RngSuite(seed));
        UntrustedStore store = UntrustedStore::for_params(
            p, encrypt_input(testutil::random_payloads(24, 8, seed), p, 8, keys));
        Stash stash(p.bucket_count, p.stash_capacity);
        RngSuite rngs(seed);
        std::vector<std::uint64_t> writes_per_bucket;
        for (std::uint64_t b = 0; b < p.bucket_count; ++b) {
            const std::size_t before = store.trace().size();
            distribute_bucket(stash, b, store, p, 8, keys, rngs, AssignMode::Separators);
            std::uint64_t w = 0;
            for (std::size_t i = before; i < store.trace().size(); ++i)
                w += store.trace()[i].op == AccessOp::Write;
            writes_per_bucket.push_back(w);
        }
        for (const auto w : writes_per_bucket) CHECK(w == p.bucket_count * p.chunk_cap);
        const std::size_t before = store.trace().size();
        drain_stash(stash, store, p, 8, keys);
        CHECK(store.trace().size() - before == p.bucket_count * p.drain_quota);
    }
}
