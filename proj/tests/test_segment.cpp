#include <gtest/gtest.h>

#include "adhocnet/segment.hpp"

namespace an = adhocnet;

TEST(Checksum, FrozenCrc32Vectors) {
    EXPECT_EQ(an::crc32_ieee(an::Bytes{}), 0x00000000u);
    const std::string s = "123456789";
    EXPECT_EQ(an::crc32_ieee(an::ByteView(reinterpret_cast<const std::uint8_t*>(s.data()), s.size())),
              0xCBF43926u);
}

TEST(Segment, HeaderLayoutIsPinned) {
    an::Segment s;
    s.header.flags = an::kFlagData;
    s.header.msg_id = 0x0102;
    s.header.frag_index = 0x0304;
    s.header.frag_count = 0x0506;
    s.payload = an::Bytes{0xAA};
    s.header.payload_len = 1;
    s.header.crc32 = an::crc32_ieee(s.payload);
    an::Bytes wire = s.encode();
    ASSERT_EQ(wire.size(), an::kSegmentHeaderSize + 1);
    // version | flags | msg_id | frag_index | frag_count | payload_len | crc
    EXPECT_EQ(wire[0], an::kSegmentVersion);
    EXPECT_EQ(wire[1], an::kFlagData);
    EXPECT_EQ(an::to_hex(an::ByteView(wire.data() + 2, 8)), "0102" "0304" "0506" "0001");
}

TEST(Segment, RoundTripAndCrc) {
    an::Segment s;
    s.header.flags = an::kFlagData;
    s.header.msg_id = 7;
    s.header.frag_index = 2;
    s.header.frag_count = 3;
    s.payload = an::Bytes{1, 2, 3, 4};
    s.header.payload_len = 4;
    s.header.crc32 = an::crc32_ieee(s.payload);
    auto back = an::Segment::decode(s.encode());
    ASSERT_TRUE(back.has_value());
    EXPECT_EQ(*back, s);
    EXPECT_TRUE(back->crc_ok());
}

TEST(Segment, CorruptedPayloadFailsCrc) {
    auto segs = an::fragment(an::Bytes{10, 20, 30}, 1400, 5);
    an::Bytes wire = segs[0].encode();
    wire.back() ^= 0x01;
    auto back = an::Segment::decode(wire);
    ASSERT_TRUE(back.has_value());  // structurally fine
    EXPECT_FALSE(back->crc_ok());   // checksum catches it
}

TEST(Segment, DecodeRejectsStructuralProblems) {
    auto segs = an::fragment(an::Bytes{1}, 1400, 1);
    an::Bytes good = segs[0].encode();

    an::Bytes truncated(good.begin(), good.begin() + 10);
    EXPECT_FALSE(an::Segment::decode(truncated).has_value());

    an::Bytes bad_version = good;
    bad_version[0] = 9;
    EXPECT_FALSE(an::Segment::decode(bad_version).has_value());

    an::Bytes both_flags = good;
    both_flags[1] = an::kFlagAck | an::kFlagData;
    EXPECT_FALSE(an::Segment::decode(both_flags).has_value());

    an::Bytes no_flags = good;
    no_flags[1] = 0;
    EXPECT_FALSE(an::Segment::decode(no_flags).has_value());

    an::Bytes bad_len = good;
    bad_len[9] = 0x7F;  // payload_len disagrees with actual payload
    EXPECT_FALSE(an::Segment::decode(bad_len).has_value());

    an::Bytes index_past_count = good;
    index_past_count[5] = 0x09;  // frag_index 9 >= frag_count 1
    EXPECT_FALSE(an::Segment::decode(index_past_count).has_value());
}

TEST(Fragment, ThreeThousandBytesAtCapacity1400) {
    an::Bytes m(3000, 0x42);
    auto segs = an::fragment(m, 1400, 9);
    ASSERT_EQ(segs.size(), 3u);
    EXPECT_EQ(segs[0].payload.size(), 1400u);
    EXPECT_EQ(segs[1].payload.size(), 1400u);
    EXPECT_EQ(segs[2].payload.size(), 200u);
    for (std::size_t i = 0; i < segs.size(); ++i) {
        EXPECT_EQ(segs[i].header.msg_id, 9);
        EXPECT_EQ(segs[i].header.frag_index, i);
        EXPECT_EQ(segs[i].header.frag_count, 3);
        EXPECT_TRUE(segs[i].crc_ok());
    }
}

TEST(Fragment, EmptyMessageYieldsOneEmptyFragment) {
    auto segs = an::fragment({}, 1400, 1);
    ASSERT_EQ(segs.size(), 1u);
    EXPECT_EQ(segs[0].header.frag_count, 1);
    EXPECT_EQ(segs[0].header.payload_len, 0);
    EXPECT_TRUE(segs[0].payload.empty());
}

TEST(Fragment, ExactCapacityIsOneFragment) {
    an::Bytes m(1400, 1);
    EXPECT_EQ(an::fragment(m, 1400, 2).size(), 1u);
    an::Bytes m2(1401, 1);
    EXPECT_EQ(an::fragment(m2, 1400, 3).size(), 2u);
}

TEST(Fragment, PayloadsConcatenateBack) {
    an::Bytes m;
    for (int i = 0; i < 3456; ++i) m.push_back(static_cast<std::uint8_t>(i));
    auto segs = an::fragment(m, 1000, 4);
    an::Bytes glued;
    for (const auto& s : segs) glued.insert(glued.end(), s.payload.begin(), s.payload.end());
    EXPECT_EQ(glued, m);
}

TEST(Fragment, RejectsBadCapacity) {
    EXPECT_THROW(an::fragment(an::Bytes{1}, 0, 1), an::Error);
    EXPECT_THROW(an::fragment(an::Bytes{1}, an::kMaxSegmentPayload + 1, 1), an::Error);
}

TEST(AckBitmap, SetGetAllSet) {
    an::AckBitmap a = an::AckBitmap::empty(3, 10);
    EXPECT_EQ(a.bitmap.size(), 2u);
    EXPECT_FALSE(a.all_set(10));
    for (int i = 0; i < 10; ++i) a.set(static_cast<std::size_t>(i));
    EXPECT_TRUE(a.all_set(10));
    EXPECT_TRUE(a.get(9));
    EXPECT_FALSE(a.get(10));  // out of range reads as unset
}

TEST(AckBitmap, EncodeDecodeRoundTrip) {
    an::AckBitmap a = an::AckBitmap::empty(0xBEEF, 12);
    a.set(0);
    a.set(11);
    auto back = an::AckBitmap::decode(a.encode(), 12);
    ASSERT_TRUE(back.has_value());
    EXPECT_EQ(back->msg_id, 0xBEEF);
    EXPECT_TRUE(back->get(0));
    EXPECT_TRUE(back->get(11));
    EXPECT_FALSE(back->get(1));
}

TEST(AckBitmap, DecodeRejectsWrongSize) {
    an::AckBitmap a = an::AckBitmap::empty(1, 8);
    EXPECT_FALSE(an::AckBitmap::decode(a.encode(), 9).has_value());   // expects 2 bytes
    EXPECT_FALSE(an::AckBitmap::decode(a.encode(), 16).has_value());  // same
    EXPECT_TRUE(an::AckBitmap::decode(a.encode(), 8).has_value());
}
