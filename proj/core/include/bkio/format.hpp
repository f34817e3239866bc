#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include <bkio/io.hpp>
#include <bkio/types.hpp>

// "BKIO" v1 layout, all integers big-endian:
//
//   header   "BKIO" | version u32 | reserved u32                         12 bytes
//   record   branch_id u32 | first_entry u64 | entry_count u32 | codec u8
//            | level u8 | uncompressed_size u32 | compressed_size u32    26 bytes
//            | payload[compressed_size]
//   footer   "BKFT" | total_entries u64
//            | n_branches u32 | { branch_id u32 | element u8 | shape u8 | fixed_len u32
//                                 | basket_target_bytes u32 | name_len u16 | name }
//            | n_clusters u32 | { boundary u64 }
//            | n_baskets u32  | { branch_id u32 | first_entry u64 | entry_count u32
//                                 | file_offset u64 | codec u8 | level u8
//                                 | uncompressed_size u32 | compressed_size u32 }
//   trailer  footer_offset u64 | "BKIO"                                  12 bytes
//
// The footer is the only index. Record headers duplicate their footer entry and
// are consulted only to cross-check reads and to diagnose damaged files.

namespace bkio {

inline constexpr std::uint32_t format_version = 1;
inline constexpr std::size_t file_header_size = 12;
inline constexpr std::size_t basket_record_header_size = 26;
inline constexpr std::size_t trailer_size = 12;
inline constexpr std::array<std::uint8_t, 4> file_magic{'B', 'K', 'I', 'O'};
inline constexpr std::array<std::uint8_t, 4> footer_magic{'B', 'K', 'F', 'T'};

std::vector<std::uint8_t> encode_file_header(std::uint32_t version);
/// Returns the version; throws bad_magic / unsupported_version / truncated.
std::uint32_t decode_file_header(std::span<const std::uint8_t> bytes);

/// `meta.file_offset` is not part of the record (the footer owns it).
std::vector<std::uint8_t> encode_basket_record(const BasketMeta& meta, std::span<const std::uint8_t> payload);

struct DecodedRecord {
    BasketMeta meta; ///< file_offset left at 0
    std::span<const std::uint8_t> payload;
};
DecodedRecord decode_basket_record(std::span<const std::uint8_t> bytes);

/// Encodes footer and trailer; `footer_offset` is where the footer will land in the file.
std::vector<std::uint8_t> encode_footer(const FileTables& tables, std::uint64_t footer_offset);

/// Checks every structural invariant of decoded tables; throws invalid_index.
void validate_tables(const FileTables& tables);

/// Reads and validates the whole index of a file.
FileTables decode_file(const ByteSource& source);

} // namespace bkio
