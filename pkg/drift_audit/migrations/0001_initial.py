# Generated by Django 5.2.6 on 2026-10-18 10:41

from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='DriftRecordRow',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('run_dir', models.CharField(max_length=512)),
                ('image_id', models.CharField(max_length=255)),
                ('kind', models.CharField(max_length=16)),
                ('source_id', models.CharField(max_length=255)),
                ('iou', models.FloatField(blank=True, help_text='Empty when the segmenter failed', null=True)),
                ('segmenter', models.CharField(max_length=64)),
                ('fold', models.PositiveSmallIntegerField(blank=True, null=True)),
                ('quality', models.CharField(blank=True, max_length=8)),
                ('area_fraction', models.FloatField(default=0.0)),
                ('components', models.PositiveIntegerField(default=0)),
                ('error', models.TextField(blank=True)),
                ('created_at', models.DateTimeField(auto_now_add=True)),
                ('updated_at', models.DateTimeField(auto_now=True)),
            ],
            options={
                'db_table': 'drift_records',
                'ordering': ('image_id',),
                'constraints': [models.UniqueConstraint(fields=('run_dir', 'image_id'), name='unique_drift_image_per_run')],
            },
        ),
    ]
