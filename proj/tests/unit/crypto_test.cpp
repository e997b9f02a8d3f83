#include <gtest/gtest.h>

#include "orbitkem/common/bytes.hpp"
#include "orbitkem/crypto/crc32.hpp"
#include "orbitkem/crypto/hkdf.hpp"
#include "orbitkem/crypto/keccak.hpp"
#include "orbitkem/crypto/primitives.hpp"
#include "orbitkem/crypto/xtea.hpp"

using namespace orbitkem;
using namespace orbitkem::crypto;

namespace {
std::string hex(ByteView b) { return to_hex(b); }
Bytes ascii(std::string_view s) { return to_bytes(s); }
} // namespace

TEST(Bytes, HexRoundTrip) {
    const auto b = from_hex("00ff10Ab");
    EXPECT_EQ(b, (Bytes{0x00, 0xff, 0x10, 0xab}));
    EXPECT_EQ(to_hex(b), "00ff10ab");
    EXPECT_EQ(to_hex(b, true), "00FF10AB");
    EXPECT_THROW(from_hex("abc"), Error);
    EXPECT_THROW(from_hex("zz"), Error);
    EXPECT_TRUE(from_hex("").empty());
}

TEST(Bytes, ReaderRejectsOverrun) {
    ByteWriter w;
    w.u16(0xBEEF);
    w.blob(ascii("xyz"));
    const auto bytes = w.bytes();
    ByteReader r(bytes);
    EXPECT_EQ(r.u16(), 0xBEEF);
    EXPECT_EQ(r.blob(), ascii("xyz"));
    EXPECT_TRUE(r.done());
    EXPECT_THROW(r.u8(), Error);

    const Bytes lying{0, 0, 0, 9, 1, 2};
    ByteReader r2(lying);
    EXPECT_THROW(r2.blob(), Error);
}

TEST(Bytes, ConstantTimeEqual) {
    EXPECT_TRUE(ct_equal(ascii("abc"), ascii("abc")));
    EXPECT_FALSE(ct_equal(ascii("abc"), ascii("abd")));
    EXPECT_FALSE(ct_equal(ascii("abc"), ascii("ab")));
}

TEST(Keccak, Sha3AndShakeVectors) {
    EXPECT_EQ(hex(sha3_256(ByteView{})), "a7ffc6f8bf1ed76651c14756a061d662f580ff4de43b49fa82d80a4b80f8434a");
    EXPECT_EQ(hex(sha3_256(ascii("abc"))), "3a985da74fe225b2045c172d6bd390bd855f086e3e9d525b46bfe24511431532");
    EXPECT_EQ(hex(sha3_512(ascii("abc"))),
              "b751850b1a57168a5693cd924b6b096e08f621827444f70d884f5d0240d2712e"
              "10e116e9192af3c91a7ec57647e3934057340b4cf408d5a56592f8274eec53f0");
    EXPECT_EQ(hex(shake128({}, 32)), "7f9c2ba4e88f827d616045507605853ed73b8093f6efbc88eb1a6eacfa66ef26");
    EXPECT_EQ(hex(shake256({}, 64)),
              "46b9dd2b0ba88d13233b3feb743eeb243fcd52ea62b81b82b50c27646ed5762f"
              "d75dc4ddd8c0f200cb05019d67b592f6fc821c49479ab48640292eacb3b7c4be");
    // More than one rate block of input.
    EXPECT_EQ(hex(sha3_256(Bytes(200, 'a'))), "cce34485baf2bf2aca99b94833892a4f52896d3d153f7b840cc4f9fe695f1387");
}

TEST(Keccak, IncrementalMatchesOneShot) {
    Bytes input;
    for (int i = 0; i < 3; ++i)
        for (int b = 0; b < 256; ++b) input.push_back(static_cast<std::uint8_t>(b));
    const auto one = shake128({input}, 500);
    EXPECT_EQ(hex(ByteView(one).subspan(480)), "5ee212688b412bfb19244c6b3f6823fe7bd6e1d4");

    Shake128 x;
    x.absorb(ByteView(input).first(100));
    x.absorb(ByteView(input).subspan(100));
    Bytes out(500);
    x.squeeze(std::span<std::uint8_t>(out).first(7));
    x.squeeze(std::span<std::uint8_t>(out).subspan(7));
    EXPECT_EQ(out, one);
    EXPECT_EQ(sha3_256({ascii("ab"), ascii("c")}), sha3_256(ascii("abc")));
}

TEST(Hmac, Rfc2202Sha1) {
    EXPECT_EQ(hex(hmac_sha1(Bytes(20, 0x0b), ascii("Hi There"))), "b617318655057264e28bc0b6fb378c8ef146be00");
    EXPECT_EQ(hex(hmac_sha1(ascii("Jefe"), ascii("what do ya want for nothing?"))),
              "effcdf6ae5eb2fa2d27416d5f184df9c259a7c79");
    EXPECT_EQ(hex(hmac_sha1(Bytes(20, 0xaa), Bytes(50, 0xdd))), "125d7342b9ac11cd91a39af48aa17b4f63f175d3");
}

TEST(Hmac, Rfc4231Sha256) {
    EXPECT_EQ(hex(hmac_sha256(Bytes(20, 0x0b), ascii("Hi There"))),
              "b0344c61d8db38535ca8afceaf0bf12b881dc200c9833da726e9376c2e32cff7");
}

TEST(Crc32, CheckValueAndIncremental) {
    EXPECT_EQ(crc32(ascii("123456789")), 0xCBF43926u);
    EXPECT_EQ(crc32(ByteView{}), 0u);
    Crc32 c;
    c.update(ascii("1234"));
    c.update(ascii("56789"));
    EXPECT_EQ(c.value(), 0xCBF43926u);
}

TEST(Hkdf, Rfc5869Case1) {
    const Bytes ikm(22, 0x0b);
    const auto salt = from_hex("000102030405060708090a0b0c");
    const auto info = from_hex("f0f1f2f3f4f5f6f7f8f9");
    EXPECT_EQ(hex(hkdf_extract(salt, ikm)), "077709362c2e32df0ddc3f0dc47bba6390b6c73bb50f9c3122ec844ad7c2b3e5");
    EXPECT_EQ(hex(hkdf(salt, ikm, info, 42)),
              "3cb25f25faacd57a90434f64d0362f2a2d2d0a90cf1a5a4c5db02d56ecc4c5bf34007208d5b887185865");
}

TEST(Hkdf, LengthLimit) {
    const auto prk = hkdf_extract(ascii("s"), ascii("k"));
    EXPECT_EQ(hkdf_expand(prk, {}, 255 * 32).size(), 255u * 32u);
    EXPECT_THROW(hkdf_expand(prk, {}, 255 * 32 + 1), Error);
}

TEST(Aes, Fips197Block) {
    Bytes key(32);
    for (int i = 0; i < 32; ++i) key[i] = static_cast<std::uint8_t>(i);
    const auto ct = aes256_encrypt_block(key, from_hex("00112233445566778899aabbccddeeff"));
    EXPECT_EQ(hex(ct), "8ea2b7ca516745bfeafc49904b496089");
}

TEST(AesGcm, NistTestCase16) {
    const auto key = from_hex("feffe9928665731c6d6a8f9467308308feffe9928665731c6d6a8f9467308308");
    const auto iv = from_hex("cafebabefacedbaddecaf888");
    const auto pt = from_hex(
        "d9313225f88406e5a55909c5aff5269a86a7a9531534f7da2e4c303d8a318a721c3c0c95956809532fcf0e2449a6b525"
        "b16aedf5aa0de657ba637b39");
    const auto aad = from_hex("feedfacedeadbeeffeedfacedeadbeefabaddad2");
    const auto s = aes256_gcm_seal(key, iv, pt, aad);
    EXPECT_EQ(hex(s.ciphertext),
              "522dc1f099567d07f47f37a32a84427d643a8cdcbfe5c0c97598a2bd2555d1aa8cb08e48590dbb3da7b08b105682883"
              "8c5f61e6393ba7a0abcc9f662");
    EXPECT_EQ(hex(s.tag), "76fc6ece0f4e1768cddf8853bb2d551b");
    const auto opened = aes256_gcm_open(key, iv, s.ciphertext, aad, s.tag);
    ASSERT_TRUE(opened);
    EXPECT_EQ(*opened, pt);
}

TEST(AesGcm, ZeroKeyVectors) {
    const Bytes key(32, 0), iv(12, 0);
    EXPECT_EQ(hex(aes256_gcm_seal(key, iv, {}, {}).tag), "530f8afbc74536b9a963b4f1c4cb738b");
    const auto s = aes256_gcm_seal(key, iv, Bytes(16, 0), {});
    EXPECT_EQ(hex(s.ciphertext), "cea7403d4d606b6e074ec5d3baf39d18");
    EXPECT_EQ(hex(s.tag), "d0d1c8a799996bf0265b98b5d48ab919");
}

TEST(AesGcm, RejectsAnyModification) {
    const Bytes key(32, 7), iv(12, 9);
    const auto pt = ascii("attitude control: hold");
    const auto aad = ascii("hdr");
    const auto s = aes256_gcm_seal(key, iv, pt, aad);
    auto ct = s.ciphertext;
    ct[3] ^= 1;
    EXPECT_FALSE(aes256_gcm_open(key, iv, ct, aad, s.tag));
    EXPECT_FALSE(aes256_gcm_open(key, iv, s.ciphertext, ascii("hdR"), s.tag));
    auto tag = s.tag;
    tag[15] ^= 0x80;
    EXPECT_FALSE(aes256_gcm_open(key, iv, s.ciphertext, aad, tag));
    EXPECT_FALSE(aes256_gcm_open(key, iv, s.ciphertext, aad, ByteView(s.tag).first(12)));
    EXPECT_THROW(aes256_gcm_seal(Bytes(16), iv, pt, aad), Error);
}

// Values produced by tests/oracles/xtea_oracle.py.
TEST(Xtea, OracleVectors) {
    EXPECT_EQ(hex(xtea_encrypt_block(Bytes(16, 0), Bytes(8, 0))), "dee9d4d8f7131ed9");
    Bytes k1(16);
    for (int i = 0; i < 16; ++i) k1[i] = static_cast<std::uint8_t>(i);
    EXPECT_EQ(hex(xtea_encrypt_block(k1, from_hex("4142434445464748"))), "497df3d072612cb5");
    const auto k2 = from_hex("00112233445566778899aabbccddeeff");
    EXPECT_EQ(hex(xtea_encrypt_block(k2, from_hex("0123456789abcdef"))), "b8bf2821622b5b30");
}

TEST(Xtea, DecryptInvertsEncrypt) {
    const auto key = from_hex("0f1e2d3c4b5a69788796a5b4c3d2e1f0");
    for (unsigned rounds : {1u, 8u, 32u, 64u}) {
        const auto pt = from_hex("0011223344556677");
        const auto ct = xtea_encrypt_block(key, pt, rounds);
        const auto back = xtea_decrypt_block(key, ct, rounds);
        EXPECT_EQ(Bytes(back.begin(), back.end()), pt);
    }
    EXPECT_THROW(xtea_encrypt_block(Bytes(15), Bytes(8)), Error);
    EXPECT_THROW(xtea_encrypt_block(Bytes(16), Bytes(7)), Error);
}

TEST(Xtea, CtrIsAnInvolutionAndKeystreamMatchesBlocks) {
    const auto key = from_hex("00112233445566778899aabbccddeeff");
    const auto pt = ascii("seventeen bytes!!");
    const auto ct = xtea_ctr_crypt(key, 0x01020304, pt);
    EXPECT_EQ(xtea_ctr_crypt(key, 0x01020304, ct), pt);
    // Second keystream block = E(BE32(nonce) || BE32(1)).
    const auto ks1 = xtea_encrypt_block(key, from_hex("0102030400000001"));
    EXPECT_EQ(hex(ks1), "8c17b85a68613acd");
    for (int i = 0; i < 8; ++i) EXPECT_EQ(ct[8 + i] ^ pt[8 + i], ks1[i]);
    EXPECT_TRUE(xtea_ctr_crypt(key, 0, {}).empty());
}
