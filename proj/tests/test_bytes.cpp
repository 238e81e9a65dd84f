#include <gtest/gtest.h>

#include "adhocnet/bytes.hpp"
#include "adhocnet/error.hpp"

namespace an = adhocnet;

TEST(Bytes, BigEndianLayoutIsPinned) {
    an::ByteWriter w;
    w.u8(0xAB);
    w.u16(0x1122);
    w.u32(0x33445566);
    w.u64(0x778899AABBCCDDEEULL);
    an::Bytes b = w.take();
    ASSERT_EQ(b.size(), 15u);
    EXPECT_EQ(an::to_hex(b), "ab112233445566778899aabbccddee");
}

TEST(Bytes, ReaderRoundTrip) {
    an::ByteWriter w;
    w.u8(7);
    w.u16(0xFFEE);
    w.u32(0xDEADBEEF);
    w.u64(0x0102030405060708ULL);
    w.lp(an::Bytes{1, 2, 3});
    w.lp_str("hello");
    w.raw(an::Bytes{9, 9});
    an::Bytes b = w.take();

    an::ByteReader r(b);
    EXPECT_EQ(r.u8(), 7);
    EXPECT_EQ(r.u16(), 0xFFEE);
    EXPECT_EQ(r.u32(), 0xDEADBEEFu);
    EXPECT_EQ(r.u64(), 0x0102030405060708ULL);
    EXPECT_EQ(r.lp(), (an::Bytes{1, 2, 3}));
    an::Bytes s = r.lp();
    EXPECT_EQ(std::string(s.begin(), s.end()), "hello");
    EXPECT_EQ(r.remaining(), 2u);
    EXPECT_EQ(r.raw(2), (an::Bytes{9, 9}));
    EXPECT_TRUE(r.done());
}

TEST(Bytes, LengthPrefixIsTwoBytesBigEndian) {
    an::ByteWriter w;
    w.lp(an::Bytes(300, 0xCC));
    an::Bytes b = w.take();
    ASSERT_EQ(b.size(), 302u);
    EXPECT_EQ(b[0], 0x01);  // 300 = 0x012C
    EXPECT_EQ(b[1], 0x2C);
}

TEST(Bytes, LpRejectsOversizedField) {
    an::ByteWriter w;
    an::Bytes big(0x10000, 0);
    EXPECT_THROW(w.lp(big), an::Error);
}

TEST(Bytes, UnderflowThrowsMalformed) {
    an::Bytes b{1, 2};
    an::ByteReader r(b);
    try {
        (void)r.u32();
        FAIL() << "expected underflow";
    } catch (const an::Error& e) {
        EXPECT_EQ(e.code(), an::Errc::malformed);
    }
}

TEST(Bytes, LpUnderflowThrows) {
    an::Bytes b{0x00, 0x05, 1, 2};  // claims 5 bytes, has 2
    an::ByteReader r(b);
    EXPECT_THROW((void)r.lp(), an::Error);
}

TEST(Bytes, EmptyReaderIsDone) {
    an::Bytes b;
    an::ByteReader r(b);
    EXPECT_TRUE(r.done());
    EXPECT_EQ(r.remaining(), 0u);
}

TEST(Bytes, HexRoundTrip) {
    an::Bytes b{0x00, 0x7F, 0xFF, 0x10};
    EXPECT_EQ(an::to_hex(b), "007fff10");
    EXPECT_EQ(an::from_hex("007fff10"), b);
    EXPECT_EQ(an::from_hex(""), an::Bytes{});
}

TEST(Bytes, FromHexRejectsJunk) {
    EXPECT_THROW((void)an::from_hex("0g"), an::Error);
    EXPECT_THROW((void)an::from_hex("abc"), an::Error);  // odd length
}
