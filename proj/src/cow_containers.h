// Copyright 2026 The provgraph Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Chunked copy-on-write containers backing published graph states.
//
// Copying a container copies only its top-level array of chunk pointers.
// A chunk is mutated in place only when it was created during the current
// write generation, i.e. it cannot be reachable from any published state;
// otherwise it is cloned first. Callers pass the generation explicitly.

#ifndef PROVGRAPH_SRC_COW_CONTAINERS_H_
#define PROVGRAPH_SRC_COW_CONTAINERS_H_

#include <cassert>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <unordered_map>
#include <utility>
#include <vector>

namespace provgraph::internal {

template <class T, std::size_t kChunkSize = 64>
class CowVector {
 public:
  std::size_t size() const { return size_; }

  const T& operator[](std::size_t i) const {
    assert(i < size_);
    return *chunks_[i / kChunkSize]->items[i % kChunkSize];
  }

  void push_back(std::shared_ptr<const T> value, std::uint64_t generation) {
    if (size_ % kChunkSize == 0) {
      auto chunk = std::make_shared<Chunk>();
      chunk->generation = generation;
      chunk->items.reserve(kChunkSize);
      chunks_.push_back(std::move(chunk));
    }
    writable(chunks_.size() - 1, generation).items.push_back(std::move(value));
    ++size_;
  }

  void set(std::size_t i, std::shared_ptr<const T> value,
           std::uint64_t generation) {
    assert(i < size_);
    writable(i / kChunkSize, generation).items[i % kChunkSize] =
        std::move(value);
  }

 private:
  struct Chunk {
    std::uint64_t generation = 0;
    std::vector<std::shared_ptr<const T>> items;
  };

  Chunk& writable(std::size_t chunk, std::uint64_t generation) {
    auto& slot = chunks_[chunk];
    if (slot->generation != generation) {
      auto copy = std::make_shared<Chunk>(*slot);
      copy->generation = generation;
      slot = std::move(copy);
    }
    return *slot;
  }

  std::vector<std::shared_ptr<Chunk>> chunks_;
  std::size_t size_ = 0;
};

// Hash map split into shards; the shard count doubles as the map grows so
// a shard clone stays small.
template <class K, class V, class Hash = std::hash<K>>
class CowHashMap {
 public:
  CowHashMap() : shards_(kMinShards) {}

  std::size_t size() const { return size_; }

  const V* find(const K& key) const {
    const auto& shard = shards_[shard_of(key)];
    if (!shard) return nullptr;
    auto it = shard->map.find(key);
    return it == shard->map.end() ? nullptr : &it->second;
  }

  // Returns a mutable value for `key`, default-constructing it if absent.
  V& upsert(const K& key, std::uint64_t generation) {
    if (size_ + 1 > shards_.size() * kMaxLoad) grow(generation);
    auto& shard = writable(shard_of(key), generation);
    auto [it, inserted] = shard.map.try_emplace(key);
    if (inserted) ++size_;
    return it->second;
  }

 private:
  static constexpr std::size_t kMinShards = 64;
  static constexpr std::size_t kMaxLoad = 32;

  struct Shard {
    std::uint64_t generation = 0;
    std::unordered_map<K, V, Hash> map;
  };

  std::size_t shard_of(const K& key) const {
    // Fold high bits in; unordered_map inside the shard uses the low ones.
    const std::size_t h = Hash{}(key);
    return (h ^ (h >> 29) ^ (h >> 47)) & (shards_.size() - 1);
  }

  Shard& writable(std::size_t i, std::uint64_t generation) {
    auto& slot = shards_[i];
    if (!slot) {
      slot = std::make_shared<Shard>();
      slot->generation = generation;
    } else if (slot->generation != generation) {
      auto copy = std::make_shared<Shard>(*slot);
      copy->generation = generation;
      slot = std::move(copy);
    }
    return *slot;
  }

  void grow(std::uint64_t generation) {
    std::vector<std::shared_ptr<Shard>> old = std::move(shards_);
    shards_.assign(old.size() * 2, nullptr);
    for (const auto& shard : old) {
      if (!shard) continue;
      for (const auto& [key, value] : shard->map) {
        writable(shard_of(key), generation).map.emplace(key, value);
      }
    }
  }

  std::vector<std::shared_ptr<Shard>> shards_;
  std::size_t size_ = 0;
};

}  // namespace provgraph::internal

#endif  // PROVGRAPH_SRC_COW_CONTAINERS_H_
