# Copyright 2026 The agbench Authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Exports the conv1/bn1 stem of a torchvision ResNet-50 as a weight bundle.

  python3 tools/export_stem_weights.py --out weights/imagenet
  python3 tools/export_stem_weights.py --checkpoint deepaugment.pth.tar --out weights/da

Without --checkpoint the torchvision ImageNet weights are used; --random
skips any download and exports a freshly initialised stem.
"""

import argparse
import json
import os

import numpy as np
import torch
import torchvision


def load_model(args):
  if args.random:
    torch.manual_seed(args.seed)
    model = torchvision.models.resnet50(weights=None)
    # Fresh BN statistics are 0/1; perturb them so the export is non-trivial.
    with torch.no_grad():
      model.bn1.running_mean.uniform_(-0.5, 0.5)
      model.bn1.running_var.uniform_(0.5, 2.0)
      model.bn1.weight.uniform_(0.5, 1.5)
      model.bn1.bias.uniform_(-0.5, 0.5)
    return model, "torchvision resnet50 random init seed %d" % args.seed
  if args.checkpoint:
    model = torchvision.models.resnet50(weights=None)
    state = torch.load(args.checkpoint, map_location="cpu")
    state = state.get("state_dict", state)
    state = {k.removeprefix("module."): v for k, v in state.items()}
    model.load_state_dict(state)
    return model, os.path.basename(args.checkpoint)
  weights = torchvision.models.ResNet50_Weights.IMAGENET1K_V1
  return torchvision.models.resnet50(weights=weights), "torchvision resnet50 " + str(weights)


def export(model, source, out_dir):
  os.makedirs(out_dir, exist_ok=True)
  tensors = [
      ("conv1.weight", model.conv1.weight),
      ("bn1.weight", model.bn1.weight),
      ("bn1.bias", model.bn1.bias),
      ("bn1.running_mean", model.bn1.running_mean),
      ("bn1.running_var", model.bn1.running_var),
  ]
  entries, blob = [], bytearray()
  for name, t in tensors:
    a = t.detach().cpu().numpy().astype("<f4")
    entries.append({"name": name, "shape": list(a.shape), "dtype": "f32", "offset": len(blob)})
    blob += a.tobytes()
  with open(os.path.join(out_dir, "weights.json"), "w") as f:
    json.dump({"format": "agbench-weights/1", "source": source, "tensors": entries}, f, indent=1)
  with open(os.path.join(out_dir, "weights.bin"), "wb") as f:
    f.write(blob)


def reference_maps(model, png, out_dir):
  """Writes the torch stem's channel-mean maps for cross-checking `agbench probe`."""
  from PIL import Image
  gray = np.asarray(Image.open(png).convert("RGB"), dtype=np.float64).mean(axis=2) / 255.0
  mean = np.array([0.485, 0.456, 0.406])[:, None, None]
  std = np.array([0.229, 0.224, 0.225])[:, None, None]
  x = torch.from_numpy(((gray[None] - mean) / std).astype(np.float32))[None]
  model.eval()
  with torch.no_grad():
    conv = model.conv1(x)
    bn = model.bn1(conv)
    relu = torch.relu(bn)
    pool = model.maxpool(relu)
  out = {}
  for name, t in (("conv", conv), ("bn", bn), ("relu", relu), ("pool", pool)):
    m = t[0].mean(dim=0)
    out[name] = {"shape": list(t.shape[1:]), "raw_min": float(m.min()), "raw_max": float(m.max())}
    np.save(os.path.join(out_dir, "torch_%s.npy" % name), t[0].numpy())
  with open(os.path.join(out_dir, "torch_reference.json"), "w") as f:
    json.dump(out, f, indent=1)


def main():
  p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
  p.add_argument("--out", required=True)
  p.add_argument("--checkpoint")
  p.add_argument("--random", action="store_true")
  p.add_argument("--seed", type=int, default=0)
  p.add_argument("--reference-image", help="also dump torch stem outputs for this PNG")
  args = p.parse_args()
  model, source = load_model(args)
  export(model, source, args.out)
  if args.reference_image:
    reference_maps(model, args.reference_image, args.out)


if __name__ == "__main__":
  main()
