import json

import pytest
import torch
from tokenizers import Tokenizer, normalizers, pre_tokenizers, processors
from tokenizers.models import WordPiece
from transformers import BertConfig, BertModel, BertTokenizerFast

VOCAB = [
    "[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]",
    "remove", "the", "dir", "os", "rm", "##dir", "folder", "(", ")", ".",
    "x", "y", "shutil", "##tree", "math", "sqrt", "*", "0", "5", "##5",
    "a", "b", "code", "copy", "same", "again", "loop", "over", "items",
]


@pytest.fixture(scope="session")
def tiny_checkpoint(tmp_path_factory):
    """A deterministic local BERT-style checkpoint small enough for CI."""
    target = tmp_path_factory.mktemp("ckpt")
    vocab = {word: i for i, word in enumerate(VOCAB)}
    tk = Tokenizer(WordPiece(vocab=vocab, unk_token="[UNK]"))
    tk.normalizer = normalizers.BertNormalizer(lowercase=True)
    tk.pre_tokenizer = pre_tokenizers.BertPreTokenizer()
    tk.post_processor = processors.TemplateProcessing(
        single="[CLS] $A [SEP]",
        pair="[CLS] $A [SEP] $B:1 [SEP]:1",
        special_tokens=[("[CLS]", vocab["[CLS]"]), ("[SEP]", vocab["[SEP]"])],
    )
    tokenizer = BertTokenizerFast(
        tokenizer_object=tk,
        unk_token="[UNK]",
        pad_token="[PAD]",
        cls_token="[CLS]",
        sep_token="[SEP]",
        mask_token="[MASK]",
    )
    tokenizer.save_pretrained(str(target))
    torch.manual_seed(1234)
    config = BertConfig(
        vocab_size=len(VOCAB),
        hidden_size=16,
        num_hidden_layers=2,
        num_attention_heads=2,
        intermediate_size=32,
        max_position_embeddings=64,
    )
    BertModel(config).save_pretrained(str(target))
    return str(target)


@pytest.fixture()
def tiny_dataset(tmp_path):
    rows = [
        {
            "id": "r1",
            "group_id": "g1",
            "context": "remove the dir",
            "candidate": "os.rmdir(folder)",
            "reference": "shutil.rmtree(folder)",
            "label": 1.0,
        },
        {
            "id": "r2",
            "group_id": "g2",
            "context": "sqrt of x",
            "candidate": "math.sqrt(x)",
            "reference": "x * 0.5",
            "label": 0.0,
        },
        {
            "id": "r3",
            "group_id": "g3",
            "context": "copy the same code",
            "candidate": "code copy again",
            "reference": "code copy again",
            "label": 1.0,
        },
    ]
    path = tmp_path / "dataset.ndjson"
    path.write_text("\n".join(json.dumps(r) for r in rows) + "\n", encoding="utf-8")
    return path
